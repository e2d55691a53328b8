/*!
  \file report.hpp
  \brief End-to-end runs (parse, formulate, solve, insert, verify) and their reports
*/

#pragma once

#include "assignment.hpp"
#include "dag.hpp"
#include "error.hpp"
#include "formulation.hpp"
#include "netlist.hpp"
#include "simulator.hpp"
#include "solver.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mphase
{

enum class variant
{
  fpb,
  baseline,
  fanout,
  holdsafe
};

inline const char* to_string( variant v )
{
  switch ( v )
  {
  case variant::fpb: return "fpb";
  case variant::baseline: return "baseline";
  case variant::fanout: return "fanout";
  case variant::holdsafe: return "holdsafe";
  }
  return "?";
}

inline std::optional<variant> variant_from_string( std::string_view s )
{
  for ( auto v : { variant::fpb, variant::baseline, variant::fanout, variant::holdsafe } )
    if ( s == to_string( v ) )
      return v;
  return std::nullopt;
}

enum class solver_choice
{
  lp,
  ilp,
  both
};

struct run_options
{
  int n_phases = 2;
  std::optional<int> d_loop; // default: smallest feasible multiple of N
  variant mode = variant::baseline;
  solver_choice solver = solver_choice::both;
  double time_limit = 3000.0;
  long node_limit = -1;
  bool verify = false;
  sim_config sim;
};

struct run_report
{
  std::string benchmark;
  variant mode = variant::baseline;
  int n_phases = 1;
  int d_loop = 1;
  int threads = 1;
  long gates = 0;
  long registers = 0;

  long fpb_dffs = 0;
  std::optional<double> lp_objective;
  std::optional<long> lp_dffs; // recount after rounding
  std::optional<long> ilp_dffs;
  std::optional<double> ilp_bound;
  std::string ilp_status; // optimal, incumbent, none; empty when the ILP was not run
  long ilp_nodes = 0;
  double lp_seconds = 0.0;
  double ilp_seconds = 0.0;

  std::string emitted; // which assignment was emitted: "ilp" or "lp"
  long latency = 0;
  int output_phase = 1;
  std::string verdict = "not run";
  std::string error; // set for failed batch entries

  static std::optional<double> savings( long fpb, std::optional<long> v )
  {
    if ( !v || fpb <= 0 )
      return std::nullopt;
    return 100.0 * static_cast<double>( fpb - *v ) / static_cast<double>( fpb );
  }
  std::optional<double> lp_savings() const { return savings( fpb_dffs, lp_dffs ); }
  std::optional<double> ilp_savings() const { return savings( fpb_dffs, ilp_dffs ); }
};

struct pipeline_result
{
  run_report report;
  circuit_dag dag;
  problem_instance instance;
  std::optional<solution> lp;
  std::optional<solution> ilp;
  std::vector<long> lp_depths;
  std::vector<long> depths; // emitted assignment
  phase_assignment phases;
  annotated_netlist annotated;
  std::optional<verify_report> verification;
};

namespace detail
{

inline std::vector<long> depths_of( const problem_instance& inst, const std::vector<double>& values )
{
  std::vector<long> d( inst.depth_var.size() );
  for ( std::size_t v = 0; v < d.size(); ++v )
    d[v] = std::lround( values[inst.depth_var[v]] );
  return d;
}

inline long exact_fpb( const circuit_dag& dag, double time_limit )
{
  auto inst = formulate_fpb( dag, min_feasible_d_loop( dag, 1 ) );
  auto lp = solve_lp( inst, time_limit );
  if ( !lp.has_values() )
    throw error( error_category::solver, "FPB relaxation hit the time limit" );
  // the single-phase instance is a network problem, so the rounded relaxation is exact
  auto d = round_solution( inst, lp );
  return count_inserted( dag, recompute_edge_costs( d, dag, 1, false ), false );
}

} // namespace detail

/*! \brief Runs one benchmark under one variant and phase count. */
inline pipeline_result run_pipeline( const netlist& ntk, const run_options& opt )
{
  pipeline_result res;
  auto& rep = res.report;
  rep.benchmark = ntk.name;
  rep.mode = opt.mode;

  const bool hold_safe = opt.mode == variant::holdsafe;
  const bool fanout = opt.mode == variant::fanout;
  if ( opt.mode == variant::fpb && opt.n_phases != 1 )
    throw error( error_category::parameter, "fpb mode uses a single phase (N = 1)" );
  if ( opt.n_phases < 1 )
    throw error( error_category::parameter, "number of phases must be >= 1" );
  if ( hold_safe && opt.n_phases < 2 )
    throw error( error_category::parameter, "hold-safe clocking needs at least 2 phases" );
  if ( opt.d_loop && *opt.d_loop % opt.n_phases != 0 )
    throw error( error_category::parameter, "d_loop " + std::to_string( *opt.d_loop ) + " must be a multiple of N = " + std::to_string( opt.n_phases ) );

  res.dag = build_dag( ntk );
  const int n = opt.n_phases;
  const int d_loop = opt.d_loop.value_or( min_feasible_d_loop( res.dag, n ) );
  res.instance = formulate( res.dag, n, d_loop, hold_safe, fanout );
  auto const& inst = res.instance;
  rep.n_phases = n;
  rep.d_loop = d_loop;
  rep.threads = d_loop / n;
  rep.gates = static_cast<long>( res.dag.num_gates() );
  rep.registers = static_cast<long>( res.dag.register_pairs.size() );
  rep.fpb_dffs = detail::exact_fpb( res.dag, opt.time_limit );

  auto costs_of = [&]( const std::vector<long>& d ) { return recompute_edge_costs( d, res.dag, n, hold_safe ); };

  const bool want_lp = opt.solver != solver_choice::ilp;
  const bool want_ilp = opt.solver != solver_choice::lp;
  std::optional<std::vector<double>> warm;
  if ( want_lp )
  {
    res.lp = solve_lp( inst, opt.time_limit );
    rep.lp_seconds = res.lp->stats.seconds;
    if ( !res.lp->has_values() )
      throw error( error_category::solver, "LP relaxation hit the time limit" );
    rep.lp_objective = res.lp->objective;
    res.lp_depths = round_solution( inst, *res.lp );
    rep.lp_dffs = count_inserted( res.dag, costs_of( res.lp_depths ), fanout );
    warm = integral_point( inst, res.lp_depths );
  }
  if ( want_ilp )
  {
    res.ilp = solve_ilp( inst, opt.time_limit, warm, opt.node_limit );
    rep.ilp_seconds = res.ilp->stats.seconds;
    rep.ilp_nodes = res.ilp->stats.nodes;
    if ( res.ilp->status == solve_status::infeasible )
      throw error( error_category::solver, "ILP reported infeasible for a feasible clocking instance" );
    rep.ilp_status = res.ilp->status == solve_status::optimal ? "optimal" : res.ilp->status == solve_status::incumbent ? "incumbent" : "none";
    if ( std::isfinite( res.ilp->bound ) )
      rep.ilp_bound = res.ilp->bound;
    if ( res.ilp->has_values() )
    {
      res.depths = detail::depths_of( inst, res.ilp->values );
      rep.ilp_dffs = count_inserted( res.dag, costs_of( res.depths ), fanout );
      rep.emitted = "ilp";
    }
    else if ( !want_lp )
      throw error( error_category::solver, "ILP found no solution within the limits" );
  }
  if ( res.depths.empty() )
  {
    res.depths = res.lp_depths;
    rep.emitted = "lp";
  }

  res.phases = extract_phases( res.dag, res.depths, n, hold_safe );
  rep.latency = res.phases.latency;
  rep.output_phase = phase_of_depth( res.phases.outputs_depth, n );
  res.annotated = insert_dffs( res.dag, res.phases, costs_of( res.depths ), fanout, rep.threads );

  if ( opt.verify )
  {
    res.verification = verify( res.annotated, ntk, opt.sim );
    rep.verdict = res.verification->summary();
  }
  return res;
}

/* ---- formatting ---- */

namespace detail
{

inline std::string fixed( double v, int digits )
{
  char buf[64];
  std::snprintf( buf, sizeof buf, "%.*f", digits, v );
  return buf;
}

inline std::string or_dash( const std::optional<long>& v ) { return v ? std::to_string( *v ) : "-"; }

inline std::string percent( const std::optional<double>& v ) { return v ? fixed( *v, 1 ) + "%" : "-"; }

inline nlohmann::json opt_json( const std::optional<long>& v ) { return v ? nlohmann::json( *v ) : nlohmann::json(); }

inline nlohmann::json opt_json( const std::optional<double>& v, int digits )
{
  if ( !v )
    return nlohmann::json();
  return std::round( *v * std::pow( 10.0, digits ) ) / std::pow( 10.0, digits );
}

} // namespace detail

/*! \brief Timing fields are omitted when `timing` is false, which makes reports byte-identical across runs. */
inline nlohmann::json to_json( const run_report& r, bool timing = true )
{
  nlohmann::json j;
  j["benchmark"] = r.benchmark;
  j["variant"] = to_string( r.mode );
  j["phases"] = r.n_phases;
  j["d_loop"] = r.d_loop;
  j["threads"] = r.threads;
  j["gates"] = r.gates;
  j["registers"] = r.registers;
  j["dffs"] = { { "fpb", r.fpb_dffs }, { "lp", detail::opt_json( r.lp_dffs ) }, { "ilp", detail::opt_json( r.ilp_dffs ) } };
  j["lp_objective"] = detail::opt_json( r.lp_objective, 6 );
  j["ilp_status"] = r.ilp_status.empty() ? nlohmann::json() : nlohmann::json( r.ilp_status );
  j["ilp_bound"] = detail::opt_json( r.ilp_bound, 6 );
  j["ilp_nodes"] = r.ilp_nodes;
  j["savings_percent"] = { { "lp", detail::opt_json( r.lp_savings(), 1 ) }, { "ilp", detail::opt_json( r.ilp_savings(), 1 ) } };
  if ( timing )
    j["seconds"] = { { "lp", detail::opt_json( std::optional<double>( r.lp_seconds ), 3 ) }, { "ilp", detail::opt_json( std::optional<double>( r.ilp_seconds ), 3 ) } };
  j["emitted"] = r.emitted;
  j["latency_cycles"] = r.latency;
  j["output_phase"] = r.output_phase;
  j["verification"] = r.verdict;
  if ( !r.error.empty() )
    j["error"] = r.error;
  return j;
}

inline std::string format_json( const run_report& r, bool timing = true )
{
  nlohmann::json j = to_json( r, timing );
  j["schema"] = 1;
  return j.dump( 2 ) + "\n";
}

inline std::string ilp_cell( const run_report& r )
{
  if ( !r.ilp_dffs )
    return r.ilp_status.empty() ? "-" : "none";
  return std::to_string( *r.ilp_dffs ) + ( r.ilp_status == "incumbent" ? "*" : "" );
}

inline std::string format_text( const run_report& r, bool timing = true )
{
  std::ostringstream os;
  os << "benchmark   " << r.benchmark << " (" << r.gates << " gates, " << r.registers << " registers)\n";
  os << "variant     " << to_string( r.mode ) << ", N = " << r.n_phases << ", d_loop = " << r.d_loop << " (" << r.threads << " thread" << ( r.threads == 1 ? "" : "s" ) << ")\n";
  os << "DFFs        FPB " << r.fpb_dffs << " | LP " << detail::or_dash( r.lp_dffs );
  if ( r.lp_objective )
    os << " (relaxation " << detail::fixed( *r.lp_objective, 2 ) << ")";
  os << " | ILP " << ilp_cell( r );
  if ( !r.ilp_status.empty() )
    os << " (" << r.ilp_status << ", " << r.ilp_nodes << " nodes)";
  os << "\n";
  os << "savings     LP " << detail::percent( r.lp_savings() ) << " | ILP " << detail::percent( r.ilp_savings() ) << "\n";
  if ( timing )
    os << "time        LP " << detail::fixed( r.lp_seconds, 3 ) << " s | ILP " << detail::fixed( r.ilp_seconds, 3 ) << " s\n";
  os << "emitted     " << r.emitted << " assignment, latency " << r.latency << " cycle" << ( r.latency == 1 ? "" : "s" ) << ", outputs on phase " << r.output_phase << "\n";
  os << "verify      " << r.verdict << "\n";
  return os.str();
}

struct batch_totals
{
  long fpb = 0, lp = 0, ilp = 0;
  bool lp_complete = true, ilp_complete = true;
};

inline batch_totals totals( const std::vector<run_report>& rows )
{
  batch_totals t;
  for ( auto const& r : rows )
  {
    if ( !r.error.empty() )
      continue;
    t.fpb += r.fpb_dffs;
    if ( r.lp_dffs )
      t.lp += *r.lp_dffs;
    else
      t.lp_complete = false;
    if ( r.ilp_dffs )
      t.ilp += *r.ilp_dffs;
    else
      t.ilp_complete = false;
  }
  return t;
}

inline std::string format_batch_json( const std::vector<run_report>& rows, bool timing = true )
{
  nlohmann::json j;
  j["schema"] = 1;
  j["rows"] = nlohmann::json::array();
  for ( auto const& r : rows )
    j["rows"].push_back( to_json( r, timing ) );
  auto t = totals( rows );
  auto lp = t.lp_complete && !rows.empty() ? std::optional<long>( t.lp ) : std::nullopt;
  auto ilp = t.ilp_complete && !rows.empty() ? std::optional<long>( t.ilp ) : std::nullopt;
  j["totals"] = { { "fpb", t.fpb },
                  { "lp", detail::opt_json( lp ) },
                  { "ilp", detail::opt_json( ilp ) },
                  { "savings_percent", { { "lp", detail::opt_json( run_report::savings( t.fpb, lp ), 1 ) }, { "ilp", detail::opt_json( run_report::savings( t.fpb, ilp ), 1 ) } } } };
  return j.dump( 2 ) + "\n";
}

inline std::string format_batch_text( const std::vector<run_report>& rows, bool timing = true )
{
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{ "benchmark", "variant", "N", "d_loop", "FPB", "LP", "ILP", "save LP", "save ILP" };
  if ( timing )
  {
    head.push_back( "LP s" );
    head.push_back( "ILP s" );
  }
  head.push_back( "verify" );
  cells.push_back( head );
  for ( auto const& r : rows )
  {
    std::vector<std::string> c{ r.benchmark, to_string( r.mode ), std::to_string( r.n_phases ) };
    if ( !r.error.empty() )
    {
      c.push_back( "error: " + r.error );
      cells.push_back( c );
      continue;
    }
    c.push_back( std::to_string( r.d_loop ) );
    c.push_back( std::to_string( r.fpb_dffs ) );
    c.push_back( detail::or_dash( r.lp_dffs ) );
    c.push_back( ilp_cell( r ) );
    c.push_back( detail::percent( r.lp_savings() ) );
    c.push_back( detail::percent( r.ilp_savings() ) );
    if ( timing )
    {
      c.push_back( detail::fixed( r.lp_seconds, 3 ) );
      c.push_back( r.ilp_status.empty() ? "-" : detail::fixed( r.ilp_seconds, 3 ) );
    }
    c.push_back( r.verdict == "not run" ? "-" : r.verdict.substr( 0, r.verdict.find( ' ' ) ) );
    cells.push_back( c );
  }
  auto t = totals( rows );
  std::vector<std::string> total{ "Total", "", "", "", std::to_string( t.fpb ), t.lp_complete ? std::to_string( t.lp ) : "-",
                                  t.ilp_complete ? std::to_string( t.ilp ) : "-",
                                  t.lp_complete ? detail::percent( run_report::savings( t.fpb, t.lp ) ) : "-",
                                  t.ilp_complete ? detail::percent( run_report::savings( t.fpb, t.ilp ) ) : "-" };
  cells.push_back( total );

  std::vector<std::size_t> width( head.size(), 0 );
  for ( auto const& row : cells )
    for ( std::size_t k = 0; k < row.size() && k < width.size(); ++k )
      width[k] = std::max( width[k], row[k].size() );
  std::ostringstream os;
  for ( auto const& row : cells )
  {
    std::string line;
    for ( std::size_t k = 0; k < row.size(); ++k )
    {
      line += row[k];
      if ( k + 1 < row.size() )
        line += std::string( width[k] - std::min( width[k], row[k].size() ) + 2, ' ' );
    }
    while ( !line.empty() && line.back() == ' ' )
      line.pop_back();
    os << line << "\n";
  }
  return os.str();
}

} // namespace mphase
