/*!
  \file simulator.hpp
  \brief Phase-slot simulation of clocked netlists against a synchronous golden model

  Time advances in phase slots; slot t carries phase (t mod N) + 1 and belongs
  to cycle t / N. Every element fires once per cycle on its own phase. A
  firing first consumes the tokens latched at its inputs, then all firings of
  the slot deliver their results to the sink latches. A token is a bit; an
  empty latch means no data arrived, which is how the pipeline fills and
  drains without unknown values.
*/

#pragma once

#include "assignment.hpp"
#include "error.hpp"
#include "netlist.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace mphase
{

/*! \brief One thread's input vectors, [k][primary input]. */
using vector_stream = std::vector<std::vector<std::uint8_t>>;

struct sim_config
{
  int n_phases = 0; // 0: take from the netlist
  int threads = 0;  // 0: take from the netlist
  long vectors_per_thread = 1000;
  std::uint64_t seed = 0x5eed5fc0ffeeULL;
  long warmup_cycles = -1; // extra cycles after the last injection; -1: ceil(D_outputs / N) + T
  std::uint8_t register_init = 0;
  std::ostream* vcd = nullptr;
};

struct sim_violation
{
  long slot;
  std::string element;
  std::string message;
};

inline constexpr std::uint8_t missing_bit = 2;

struct trace
{
  std::vector<std::string> ports;
  /*! \brief [thread][k][output]; `missing_bit` where nothing arrived. */
  std::vector<vector_stream> streams;
  /*! \brief Cycle of the first token at each output, -1 when none arrived. */
  std::vector<long> first_valid_cycle;
  long latency = 0;
  long slots = 0;
  std::vector<sim_violation> violations;

  bool clean() const { return violations.empty(); }
};

/*! \brief Reproducible random vectors, [thread][k][pi]. */
inline std::vector<vector_stream> random_streams( std::size_t num_inputs, int threads, long vectors, std::uint64_t seed )
{
  std::mt19937_64 rng( seed );
  std::vector<vector_stream> s( threads, vector_stream( vectors, std::vector<std::uint8_t>( num_inputs ) ) );
  for ( auto& thread : s )
    for ( auto& v : thread )
      for ( auto& b : v )
        b = static_cast<std::uint8_t>( rng() & 1u );
  return s;
}

namespace detail
{

/*! \brief Combinational cells in evaluation order; DFF outputs and PIs act as sources. */
inline std::vector<std::size_t> combinational_order( const netlist& ntk, const std::unordered_map<std::string, std::size_t>& driver )
{
  std::vector<std::size_t> order, indeg( ntk.cells.size(), 0 );
  std::vector<std::vector<std::size_t>> users( ntk.cells.size() );
  for ( std::size_t i = 0; i < ntk.cells.size(); ++i )
  {
    if ( ntk.cells[i].op == gate_op::dff )
      continue;
    for ( auto const& f : ntk.cells[i].fanins )
      if ( auto it = driver.find( f ); it != driver.end() && ntk.cells[it->second].op != gate_op::dff )
      {
        users[it->second].push_back( i );
        ++indeg[i];
      }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for ( std::size_t i = 0; i < ntk.cells.size(); ++i )
    if ( ntk.cells[i].op != gate_op::dff && indeg[i] == 0 )
      ready.push( i );
  while ( !ready.empty() )
  {
    auto i = ready.top();
    ready.pop();
    order.push_back( i );
    for ( auto u : users[i] )
      if ( --indeg[u] == 0 )
        ready.push( u );
  }
  if ( order.size() + ntk.num_registers() != ntk.cells.size() )
    throw error( error_category::structure, "combinational cycle in " + ntk.name );
  return order;
}

inline std::string vcd_id( std::size_t i )
{
  std::string id;
  do
  {
    id.push_back( static_cast<char>( '!' + i % 94 ) );
    i /= 94;
  } while ( i );
  return id;
}

} // namespace detail

/*! \brief Synchronous reference: one step per vector, registers start at 0. Returns [k][output]. */
inline vector_stream simulate_golden( const netlist& ntk, const vector_stream& inputs )
{
  std::unordered_map<std::string, std::size_t> driver, net;
  for ( std::size_t i = 0; i < ntk.cells.size(); ++i )
    driver[ntk.cells[i].output] = i;
  for ( auto const& in : ntk.inputs )
    net.emplace( in, net.size() );
  for ( auto const& c : ntk.cells )
    net.emplace( c.output, net.size() );
  auto order = detail::combinational_order( ntk, driver );

  std::vector<std::vector<std::size_t>> fanin_ids( ntk.cells.size() );
  std::vector<std::size_t> regs;
  for ( std::size_t i = 0; i < ntk.cells.size(); ++i )
  {
    for ( auto const& f : ntk.cells[i].fanins )
      fanin_ids[i].push_back( net.at( f ) );
    if ( ntk.cells[i].op == gate_op::dff )
      regs.push_back( i );
  }
  std::vector<std::size_t> out_ids;
  for ( auto const& o : ntk.outputs )
    out_ids.push_back( net.at( o ) );

  std::vector<std::uint8_t> val( net.size(), 0 ), state( regs.size(), 0 ), args;
  vector_stream result;
  result.reserve( inputs.size() );
  for ( auto const& vec : inputs )
  {
    if ( vec.size() != ntk.inputs.size() )
      throw error( error_category::parameter, "input vector width " + std::to_string( vec.size() ) + " does not match " + std::to_string( ntk.inputs.size() ) + " inputs" );
    for ( std::size_t p = 0; p < vec.size(); ++p )
      val[p] = vec[p];
    for ( std::size_t r = 0; r < regs.size(); ++r )
      val[net.at( ntk.cells[regs[r]].output )] = state[r];
    for ( auto i : order )
    {
      args.clear();
      for ( auto f : fanin_ids[i] )
        args.push_back( val[f] );
      val[net.at( ntk.cells[i].output )] = evaluate_gate( ntk.cells[i].op, args ) ? 1 : 0;
    }
    auto& row = result.emplace_back();
    for ( auto o : out_ids )
      row.push_back( val[o] );
    for ( std::size_t r = 0; r < regs.size(); ++r )
      state[r] = val[fanin_ids[regs[r]].front()];
  }
  return result;
}

/*! \brief Runs the clocked netlist on per-thread streams ([thread][k][pi]).

  Cycle c injects vector c / T of thread c mod T. Registers (non-inserted DFF
  cells) pass their latched token through, except that their first T firings
  carrying data emit the initial state. Inserted DFFs only delay. Stops at the
  first synchronization violation.
*/
inline trace simulate_multiphase( const annotated_netlist& an, const std::vector<vector_stream>& inputs, const sim_config& cfg = {} )
{
  const int n = an.n_phases;
  const int threads = an.threads;
  if ( n < 1 || threads < 1 )
    throw error( error_category::parameter, "netlist needs N >= 1 and T >= 1" );
  if ( ( cfg.n_phases && cfg.n_phases != n ) || ( cfg.threads && cfg.threads != threads ) )
    throw error( error_category::parameter, "simulation config does not match the netlist clocking" );
  if ( static_cast<int>( inputs.size() ) != threads )
    throw error( error_category::parameter, "expected " + std::to_string( threads ) + " input streams" );
  const long vectors = inputs.front().size();
  for ( auto const& s : inputs )
    if ( static_cast<long>( s.size() ) != vectors )
      throw error( error_category::parameter, "input streams differ in length" );

  enum class kind : std::uint8_t { pi, gate, reg, delay, po };
  struct element
  {
    kind k;
    gate_op op;
    int phase;
    long stage = 0;
    std::string name;
    std::size_t first_latch = 0, num_latches = 0;
    std::vector<std::size_t> sinks; // latch indices
    long fired = 0;
  };

  std::vector<element> el;
  std::unordered_map<std::string, std::size_t> driver;
  auto label = [&]( const std::string& id ) {
    auto p = an.phase_of.find( id );
    auto d = an.depth_of.find( id );
    if ( p == an.phase_of.end() || d == an.depth_of.end() )
      throw error( error_category::verification, id + ": missing phase or depth label" );
    if ( p->second < 1 || p->second > n )
      throw error( error_category::verification, id + ": phase " + std::to_string( p->second ) + " out of range" );
    return std::pair{ p->second, d->second };
  };

  std::size_t latches = 0;
  for ( auto const& in : an.base.inputs )
  {
    auto [ph, d] = label( in );
    driver[in] = el.size();
    el.push_back( { kind::pi, gate_op::buff, ph, 0, in } );
  }
  for ( auto const& c : an.base.cells )
  {
    auto [ph, d] = label( c.output );
    kind k = c.op != gate_op::dff ? kind::gate : an.is_inserted( c.output ) ? kind::delay : kind::reg;
    driver[c.output] = el.size();
    el.push_back( { k, c.op, ph, stage_of_depth( d, n ), c.output, latches, c.fanins.size() } );
    latches += c.fanins.size();
  }
  std::vector<std::size_t> po_elements;
  long out_depth = 1;
  for ( std::size_t k = 0; k < an.base.outputs.size(); ++k )
  {
    auto id = po_id( an.ports[k] );
    auto [ph, d] = label( id );
    out_depth = std::max( out_depth, d );
    po_elements.push_back( el.size() );
    el.push_back( { kind::po, gate_op::buff, ph, stage_of_depth( d, n ), id, latches, 1 } );
    latches += 1;
  }
  auto connect = [&]( const std::string& net, std::size_t latch ) {
    auto it = driver.find( net );
    if ( it == driver.end() )
      throw error( error_category::structure, "undriven net " + net );
    el[it->second].sinks.push_back( latch );
  };
  for ( std::size_t i = 0; i < an.base.cells.size(); ++i )
  {
    auto const& e = el[an.base.inputs.size() + i];
    for ( std::size_t s = 0; s < e.num_latches; ++s )
      connect( an.base.cells[i].fanins[s], e.first_latch + s );
  }
  for ( std::size_t k = 0; k < po_elements.size(); ++k )
    connect( an.base.outputs[k], el[po_elements[k]].first_latch );

  std::vector<std::vector<std::size_t>> by_phase( n );
  for ( std::size_t i = 0; i < el.size(); ++i )
    by_phase[el[i].phase - 1].push_back( i );

  trace tr;
  tr.ports = an.ports;
  tr.latency = stage_of_depth( out_depth, n ) - 1;
  tr.streams.assign( threads, vector_stream( vectors, std::vector<std::uint8_t>( po_elements.size(), missing_bit ) ) );
  tr.first_valid_cycle.assign( po_elements.size(), -1 );
  std::vector<long> po_index( el.size(), -1 );
  for ( std::size_t k = 0; k < po_elements.size(); ++k )
    po_index[po_elements[k]] = static_cast<long>( k );

  const long injections = vectors * threads;
  const long warmup = cfg.warmup_cycles >= 0 ? cfg.warmup_cycles : stage_of_depth( out_depth, n ) + threads;
  const long total_slots = ( injections + warmup ) * n;

  std::vector<std::int8_t> latch( latches, -1 );
  std::vector<std::pair<std::size_t, std::int8_t>> emitted;
  std::vector<std::uint8_t> args;

  std::vector<std::int8_t> vcd_last;
  if ( cfg.vcd )
  {
    auto& os = *cfg.vcd;
    os << "$timescale 1ns $end\n$scope module " << ( an.base.name.empty() ? "top" : an.base.name ) << " $end\n";
    for ( std::size_t i = 0; i < el.size(); ++i )
      os << "$var wire 1 " << detail::vcd_id( i ) << " " << el[i].name << " $end\n";
    os << "$upscope $end\n$enddefinitions $end\n";
    vcd_last.assign( el.size(), -2 );
  }

  auto violate = [&]( long slot, const element& e, std::string msg ) {
    tr.violations.push_back( { slot, e.name, std::move( msg ) } );
  };

  for ( long t = 0; t < total_slots && tr.clean(); ++t )
  {
    const long cycle = t / n;
    emitted.clear();
    for ( auto i : by_phase[t % n] )
    {
      auto& e = el[i];
      const long firing = e.fired++;
      std::size_t full = 0;
      for ( std::size_t s = 0; s < e.num_latches; ++s )
        full += latch[e.first_latch + s] >= 0;
      if ( full != 0 && full != e.num_latches )
      {
        violate( t, e, std::to_string( full ) + " of " + std::to_string( e.num_latches ) + " inputs arrived" );
        break;
      }
      std::int8_t out = -1;
      switch ( e.k )
      {
      case kind::pi:
        if ( cycle < injections )
          out = static_cast<std::int8_t>( inputs[cycle % threads][cycle / threads][&e - el.data()] );
        break;
      case kind::gate:
        if ( full )
        {
          args.clear();
          for ( std::size_t s = 0; s < e.num_latches; ++s )
            args.push_back( static_cast<std::uint8_t>( latch[e.first_latch + s] ) );
          out = evaluate_gate( e.op, args ) ? 1 : 0;
        }
        break;
      case kind::delay:
        out = latch[e.first_latch];
        break;
      case kind::reg:
      {
        const long c = firing - ( e.stage - 1 );
        if ( c >= 0 && c < threads )
        {
          if ( full )
            violate( t, e, "data arrived before the register state was released" );
          out = static_cast<std::int8_t>( cfg.register_init );
        }
        else if ( c < 0 && full )
          violate( t, e, "data arrived during pipeline fill" );
        else if ( c < injections )
          out = latch[e.first_latch];
        // past the last injection the state is dropped
        break;
      }
      case kind::po:
        if ( full )
        {
          const long c = cycle - tr.latency;
          const auto k = static_cast<std::size_t>( po_index[i] );
          if ( tr.first_valid_cycle[k] < 0 )
            tr.first_valid_cycle[k] = cycle;
          if ( c < 0 || c >= injections )
            violate( t, e, "output token at cycle " + std::to_string( cycle ) + " outside the expected window" );
          else
            tr.streams[c % threads][c / threads][k] = static_cast<std::uint8_t>( latch[e.first_latch] );
        }
        break;
      }
      for ( std::size_t s = 0; s < e.num_latches; ++s )
        latch[e.first_latch + s] = -1;
      if ( !tr.clean() )
        break;
      if ( out >= 0 )
        emitted.emplace_back( i, out );
      if ( cfg.vcd && vcd_last[i] != out )
      {
        *cfg.vcd << "#" << t << "\n" << ( out < 0 ? 'z' : static_cast<char>( '0' + out ) ) << detail::vcd_id( i ) << "\n";
        vcd_last[i] = out;
      }
    }
    for ( auto [i, v] : emitted )
      for ( auto l : el[i].sinks )
      {
        if ( latch[l] >= 0 )
        {
          violate( t, el[i], "overwrote a token that was never consumed" );
          break;
        }
        latch[l] = v;
      }
    tr.slots = t + 1;
  }
  return tr;
}

struct stream_mismatch
{
  int thread;
  long index;
  std::string output;
  int expected;
  int actual; // missing_bit when no token arrived
};

struct verify_report
{
  bool pass = false;
  int threads = 1;
  long vectors_per_thread = 0;
  long latency = 0;
  /*! \brief First divergence per failing thread. */
  std::vector<stream_mismatch> mismatches;
  std::vector<sim_violation> violations;

  std::string summary() const
  {
    if ( pass )
      return "pass (" + std::to_string( threads ) + " thread(s) x " + std::to_string( vectors_per_thread ) + " vectors, latency " + std::to_string( latency ) + ")";
    if ( !violations.empty() )
    {
      auto const& v = violations.front();
      return "fail: synchronization violation at slot " + std::to_string( v.slot ) + " in " + v.element + ": " + v.message;
    }
    auto const& m = mismatches.front();
    return "fail: thread " + std::to_string( m.thread ) + " output " + m.output + " vector " + std::to_string( m.index ) +
           " expected " + std::to_string( m.expected ) + " got " + ( m.actual == missing_bit ? std::string( "nothing" ) : std::to_string( m.actual ) );
  }
};

/*! \brief Compares the clocked netlist with per-thread golden runs of the original on seeded random streams. */
inline verify_report verify( const annotated_netlist& an, const netlist& original, const sim_config& cfg = {} )
{
  if ( cfg.vectors_per_thread < 1 )
    throw error( error_category::parameter, "vectors_per_thread must be >= 1" );
  if ( an.base.inputs != original.inputs || an.ports != original.outputs )
    throw error( error_category::verification, "netlists disagree on primary inputs or outputs" );

  auto streams = random_streams( original.inputs.size(), an.threads, cfg.vectors_per_thread, cfg.seed );
  auto tr = simulate_multiphase( an, streams, cfg );

  verify_report r;
  r.threads = an.threads;
  r.vectors_per_thread = cfg.vectors_per_thread;
  r.latency = tr.latency;
  r.violations = tr.violations;
  for ( int th = 0; th < an.threads && tr.clean(); ++th )
  {
    auto golden = simulate_golden( original, streams[th] );
    bool found = false;
    for ( long k = 0; k < cfg.vectors_per_thread && !found; ++k )
      for ( std::size_t o = 0; o < original.outputs.size() && !found; ++o )
        if ( golden[k][o] != tr.streams[th][k][o] )
        {
          r.mismatches.push_back( { th, k, original.outputs[o], golden[k][o], tr.streams[th][k][o] } );
          found = true;
        }
  }
  r.pass = tr.clean() && r.mismatches.empty();
  return r;
}

} // namespace mphase
