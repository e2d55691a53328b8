/*!
  \file assignment.hpp
  \brief From integral phase depths to a clocked netlist

  Depth D of an element fixes its pipeline stage S = ceil(D / N) and clock
  phase CLK = D - S*N + N. A connection spanning depth difference delta needs
  ceil(delta / W) - 1 DFFs, W being the effective window (N, or N - 1 for
  hold-safe clocking). Inserted DFFs are spaced W apart starting at the
  driver, so the residual gap sits next to the sink; with sharing, each
  driver gets one chain as long as its most demanding fanout and every fanout
  taps the chain at its own count.
*/

#pragma once

#include "dag.hpp"
#include "error.hpp"
#include "formulation.hpp"
#include "netlist.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mphase
{

inline long stage_of_depth( long depth, int n_phases )
{
  return ( depth + n_phases - 1 ) / n_phases;
}

inline int clock_of_depth( long depth, int n_phases )
{
  return static_cast<int>( depth - stage_of_depth( depth, n_phases ) * n_phases + n_phases );
}

struct phase_assignment
{
  std::vector<long> depth;
  std::vector<long> stage;
  std::vector<int> phase;
  int n_phases = 1;
  bool hold_safe = false;
  long outputs_depth = 1;
  long latency = 0; // cycles from injection to the outputs: ceil(D_outputs / N) - 1

  int window() const { return hold_safe ? n_phases - 1 : n_phases; }
};

/*! \brief Stage and phase for every element.

  `outputs_depth` defaults to the largest depth.
*/
inline phase_assignment extract_phases( std::span<const long> depths, int n_phases, bool hold_safe = false, std::optional<long> outputs_depth = std::nullopt )
{
  if ( n_phases < 1 )
    throw error( error_category::parameter, "number of phases must be >= 1" );
  phase_assignment pa;
  pa.n_phases = n_phases;
  pa.hold_safe = hold_safe;
  pa.depth.assign( depths.begin(), depths.end() );
  for ( long d : depths )
  {
    if ( d < 1 )
      throw error( error_category::solver, "phase depth below 1" );
    pa.stage.push_back( stage_of_depth( d, n_phases ) );
    pa.phase.push_back( clock_of_depth( d, n_phases ) );
  }
  pa.outputs_depth = outputs_depth.value_or( depths.empty() ? 1 : *std::max_element( depths.begin(), depths.end() ) );
  pa.latency = stage_of_depth( pa.outputs_depth, n_phases ) - 1;
  return pa;
}

inline phase_assignment extract_phases( const circuit_dag& dag, std::span<const long> depths, int n_phases, bool hold_safe = false )
{
  long out = 1;
  for ( int po : dag.pos )
    out = std::max( out, depths[po] );
  return extract_phases( depths, n_phases, hold_safe, out );
}

/*! \brief Minimal DFF count per edge for the given depths. */
inline std::vector<long> recompute_edge_costs( std::span<const long> depths, const circuit_dag& dag, int n_phases, bool hold_safe )
{
  int w = hold_safe ? n_phases - 1 : n_phases;
  if ( w < 1 )
    throw error( error_category::parameter, "hold-safe clocking needs at least 2 phases" );
  std::vector<long> costs;
  costs.reserve( dag.num_edges() );
  for ( auto const& e : dag.edges )
  {
    long delta = depths[e.dst] - depths[e.src];
    if ( delta < 1 )
      throw error( error_category::solver, "edge " + dag.nodes[e.src].name + " -> " + dag.nodes[e.dst].name + " has depth span " + std::to_string( delta ) + " < 1" );
    costs.push_back( dffs_for_span( delta, w ) );
  }
  return costs;
}

struct inserted_dff
{
  std::string name;
  long depth;
  int phase;
};

struct insertion_plan
{
  int n_phases = 1;
  int window = 1;
  bool fanout_aware = false;
  std::vector<long> edge_costs;
  /*! \brief Baseline: one chain per edge. */
  std::vector<std::vector<inserted_dff>> edge_chains;
  /*! \brief Fanout-aware: one chain per driver node, length max of its edge costs. */
  std::vector<std::vector<inserted_dff>> driver_chains;
  /*! \brief Chain position feeding each edge's sink (0: the driver itself). */
  std::vector<long> taps;
};

/*! \brief Number of inserted DFFs: sum of C_ij, or sum of per-driver chain lengths with sharing. */
inline long count_inserted( const insertion_plan& plan )
{
  long n = 0;
  for ( auto const& c : plan.edge_chains )
    n += static_cast<long>( c.size() );
  for ( auto const& c : plan.driver_chains )
    n += static_cast<long>( c.size() );
  return n;
}

/*! \brief Count of inserted DFFs for given edge costs without building names. */
inline long count_inserted( const circuit_dag& dag, std::span<const long> costs, bool fanout_aware )
{
  long n = 0;
  if ( !fanout_aware )
  {
    for ( long c : costs )
      n += c;
    return n;
  }
  for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
  {
    long chain = 0;
    for ( int e : dag.fanout_edges[v] )
      chain = std::max( chain, costs[e] );
    n += chain;
  }
  return n;
}

namespace detail
{

inline std::set<std::string> used_names( const circuit_dag& dag )
{
  std::set<std::string> names;
  for ( auto const& n : dag.nodes )
    names.insert( n.origin );
  return names;
}

inline std::string fresh_name( const std::string& base, std::set<std::string>& used )
{
  std::string name = base;
  while ( !used.insert( name ).second )
    name += "_";
  return name;
}

} // namespace detail

/*! \brief Places the DFFs: W apart starting at the driver, named `<driver>_pb<m>`. */
inline insertion_plan plan_insertion( const circuit_dag& dag, const phase_assignment& phases, std::span<const long> costs, bool fanout_aware )
{
  insertion_plan plan;
  plan.n_phases = phases.n_phases;
  plan.window = phases.window();
  plan.fanout_aware = fanout_aware;
  plan.edge_costs.assign( costs.begin(), costs.end() );
  plan.taps.assign( costs.begin(), costs.end() );
  const int w = plan.window;
  auto used = detail::used_names( dag );

  // m: position along the chain; label: running number in the name
  auto make = [&]( int driver, long m, long label ) {
    long d = phases.depth[driver] + m * w;
    return inserted_dff{ detail::fresh_name( dag.nodes[driver].origin + "_pb" + std::to_string( label ), used ), d, clock_of_depth( d, phases.n_phases ) };
  };

  if ( fanout_aware )
  {
    plan.driver_chains.resize( dag.num_nodes() );
    for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
    {
      long len = 0;
      for ( int e : dag.fanout_edges[v] )
        len = std::max( len, costs[e] );
      for ( long m = 1; m <= len; ++m )
        plan.driver_chains[v].push_back( make( static_cast<int>( v ), m, m ) );
    }
  }
  else
  {
    plan.edge_chains.resize( dag.num_edges() );
    for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
    {
      long counter = 0;
      for ( int e : dag.fanout_edges[v] )
      {
        for ( long m = 1; m <= costs[e]; ++m )
          plan.edge_chains[e].push_back( make( static_cast<int>( v ), m, ++counter ) );
      }
    }
  }

  // tap feasibility: the residual gap must lie in [1, W]
  for ( std::size_t e = 0; e < dag.num_edges(); ++e )
  {
    long delta = phases.depth[dag.edges[e].dst] - phases.depth[dag.edges[e].src];
    long residual = delta - costs[e] * w;
    if ( residual < 1 || residual > w )
      throw error( error_category::solver, "edge " + dag.nodes[dag.edges[e].src].name + " -> " + dag.nodes[dag.edges[e].dst].name +
                                               ": " + std::to_string( costs[e] ) + " DFFs leave a gap of " + std::to_string( residual ) );
  }
  return plan;
}

/*! \brief Builds the clocked netlist for a placement plan; registers become single DFF cells again. */
inline annotated_netlist build_annotated( const circuit_dag& dag, const phase_assignment& phases, const insertion_plan& plan, int threads )
{
  annotated_netlist an;
  an.base.name = dag.name;
  an.n_phases = phases.n_phases;
  an.threads = threads;

  auto chain_of_edge = [&]( int e ) -> const std::vector<inserted_dff>& {
    return plan.fanout_aware ? plan.driver_chains[dag.edges[e].src] : plan.edge_chains[e];
  };
  auto tap_net = [&]( int src, int dst ) -> std::string {
    int e = dag.find_edge( src, dst );
    long t = plan.taps[e];
    return t == 0 ? dag.nodes[src].origin : chain_of_edge( e )[t - 1].name;
  };
  auto label = [&]( const std::string& id, long depth ) {
    an.depth_of[id] = depth;
    an.phase_of[id] = clock_of_depth( depth, phases.n_phases );
  };
  auto emit_chains = [&]( int v ) {
    auto emit = [&]( const std::vector<inserted_dff>& chain ) {
      std::string prev = dag.nodes[v].origin;
      for ( auto const& d : chain )
      {
        an.base.cells.push_back( cell{ d.name, gate_op::dff, { prev } } );
        an.inserted.insert( d.name );
        label( d.name, d.depth );
        prev = d.name;
      }
    };
    if ( plan.fanout_aware )
      emit( plan.driver_chains[v] );
    else
      for ( int e : dag.fanout_edges[v] )
        emit( plan.edge_chains[e] );
  };

  for ( int v : dag.pis )
  {
    an.base.inputs.push_back( dag.nodes[v].origin );
    label( dag.nodes[v].origin, phases.depth[v] );
  }
  for ( int v : dag.pis )
    emit_chains( v );

  std::unordered_map<int, int> pso_of_psi;
  for ( auto const& [pso, psi] : dag.register_pairs )
    pso_of_psi[psi] = pso;

  for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
  {
    auto const& n = dag.nodes[v];
    if ( n.kind == node_kind::gate )
    {
      cell c{ n.origin, n.op, {} };
      for ( int src : n.fanin_nodes )
        c.fanins.push_back( tap_net( src, static_cast<int>( v ) ) );
      an.base.cells.push_back( std::move( c ) );
      label( n.origin, phases.depth[v] );
      emit_chains( static_cast<int>( v ) );
    }
    else if ( n.kind == node_kind::psi )
    {
      int pso = pso_of_psi.at( static_cast<int>( v ) );
      an.base.cells.push_back( cell{ n.origin, gate_op::dff, { tap_net( dag.nodes[pso].fanin_nodes.front(), pso ) } } );
      label( n.origin, phases.depth[v] );
      emit_chains( static_cast<int>( v ) );
    }
  }
  for ( int v : dag.pos )
  {
    auto const& n = dag.nodes[v];
    an.base.outputs.push_back( tap_net( n.fanin_nodes.front(), v ) );
    an.ports.push_back( n.origin );
    label( po_id( n.origin ), phases.depth[v] );
  }
  return an;
}

/*! \brief Problems with an annotated netlist: wire gaps outside [1, W], labels inconsistent with depths,
    unequal output depths, and (hold-safe) connected elements sharing a phase. Empty when valid.
*/
inline std::vector<std::string> check_annotated( const annotated_netlist& an, bool hold_safe )
{
  std::vector<std::string> issues;
  const int n = an.n_phases;
  const int w = hold_safe ? n - 1 : n;
  auto depth = [&]( const std::string& id ) -> std::optional<long> {
    auto it = an.depth_of.find( id );
    if ( it == an.depth_of.end() )
      return std::nullopt;
    return it->second;
  };

  for ( auto const& [id, d] : an.depth_of )
  {
    auto it = an.phase_of.find( id );
    if ( it == an.phase_of.end() )
      issues.push_back( id + ": no phase label" );
    else if ( it->second != phase_of_depth( d, n ) )
      issues.push_back( id + ": phase " + std::to_string( it->second ) + " does not match depth " + std::to_string( d ) );
  }
  for ( auto const& in : an.base.inputs )
  {
    if ( depth( in ) != 1L )
      issues.push_back( in + ": primary input not at depth 1" );
  }

  auto wire = [&]( const std::string& from, const std::string& to, long to_depth, int to_phase ) {
    auto d = depth( from );
    if ( !d )
    {
      issues.push_back( from + ": no depth label" );
      return;
    }
    long gap = to_depth - *d;
    if ( gap < 1 || gap > w )
      issues.push_back( from + " -> " + to + ": depth gap " + std::to_string( gap ) + " outside [1, " + std::to_string( w ) + "]" );
    if ( hold_safe && an.phase_of.count( from ) && an.phase_of.at( from ) == to_phase )
      issues.push_back( from + " -> " + to + ": both on phase " + std::to_string( to_phase ) );
  };

  for ( auto const& c : an.base.cells )
  {
    auto d = depth( c.output );
    if ( !d || !an.phase_of.count( c.output ) )
    {
      issues.push_back( c.output + ": no depth/phase label" );
      continue;
    }
    bool reg = c.op == gate_op::dff && !an.is_inserted( c.output );
    long in_depth = reg ? *d + an.d_loop() : *d;
    for ( auto const& f : c.fanins )
      wire( f, c.output, in_depth, an.phase_of.at( c.output ) );
  }
  std::optional<long> out_depth;
  for ( std::size_t k = 0; k < an.base.outputs.size(); ++k )
  {
    auto id = po_id( an.ports[k] );
    auto d = depth( id );
    if ( !d || !an.phase_of.count( id ) )
    {
      issues.push_back( id + ": no depth/phase label" );
      continue;
    }
    if ( out_depth && *out_depth != *d )
      issues.push_back( id + ": output depth " + std::to_string( *d ) + " differs from " + std::to_string( *out_depth ) );
    out_depth = d;
    wire( an.base.outputs[k], id, *d, an.phase_of.at( id ) );
  }
  return issues;
}

/*! \brief Inserts the DFFs for integral depths and returns the clocked netlist.

  Throws when the result violates the window rule (which would indicate inconsistent inputs).
*/
inline annotated_netlist insert_dffs( const circuit_dag& dag, const phase_assignment& phases, std::span<const long> costs, bool fanout_aware, int threads = 1 )
{
  auto plan = plan_insertion( dag, phases, costs, fanout_aware );
  auto an = build_annotated( dag, phases, plan, threads );
  if ( auto issues = check_annotated( an, phases.hold_safe ); !issues.empty() )
    throw error( error_category::solver, "inserted netlist is inconsistent: " + issues.front() );
  return an;
}

} // namespace mphase
