/*!
  \file formulation.hpp
  \brief Phase-depth clocking assignment as a (mixed-)integer linear program

  Every node i of the circuit graph gets a phase depth D_i, every edge (i,j) a
  count C_ij of path-balancing DFFs. With an effective window W (N phases, or
  N-1 for hold-safe clocking):

      minimize    sum C_ij                       (or sum C_i when fanout-aware)
      subject to  1 <= D_j - D_i <= (C_ij + 1) W     for every edge
                  D_i = 1                            for primary inputs
                  D_i = D_outputs                    for primary outputs
                  D_pso - D_psi = d_loop             for every register
                  C_ij <= C_i                        (fanout-aware only)
                  D >= 1, C >= 0, integral

  Full path balancing is the single-phase instance (N = 1).
*/

#pragma once

#include "dag.hpp"
#include "error.hpp"
#include "lp_model.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace mphase
{

struct problem_instance
{
  lp_model model;

  int n_phases = 1;
  int d_loop = 1;
  bool hold_safe = false;
  bool fanout_aware = false;
  int window = 1; // N, or N - 1 when hold-safe

  std::vector<int> depth_var;  // per dag node
  int outputs_var = -1;
  std::vector<int> edge_var;   // per dag edge
  std::vector<int> driver_var; // per dag node, -1 unless fanout-aware with fanout
  std::vector<std::pair<int, int>> edge_ends; // (src, dst) node per dag edge
  std::vector<int> po_nodes;

  /*! \brief A feasible integral point (longest-path depths with minimal DFF counts). */
  std::vector<double> start;

  std::size_t num_pis = 0;
  std::size_t num_pos = 0;
  std::size_t num_registers = 0;
};

namespace detail
{

/* longest edge count from each register's PSI to every register's PSO, -1 if unreachable */
inline std::vector<std::vector<long>> register_path_lengths( const circuit_dag& dag, const std::vector<int>& topo )
{
  std::size_t r = dag.register_pairs.size();
  std::vector<int> pso_index( dag.num_nodes(), -1 );
  for ( std::size_t k = 0; k < r; ++k )
    pso_index[dag.register_pairs[k].first] = static_cast<int>( k );

  std::vector<std::vector<long>> w( r, std::vector<long>( r, -1 ) );
  std::vector<long> dist( dag.num_nodes() );
  for ( std::size_t a = 0; a < r; ++a )
  {
    std::fill( dist.begin(), dist.end(), -1 );
    dist[dag.register_pairs[a].second] = 0;
    for ( int v : topo )
    {
      if ( dist[v] < 0 )
        continue;
      for ( int e : dag.fanout_edges[v] )
        dist[dag.edges[e].dst] = std::max( dist[dag.edges[e].dst], dist[v] + 1 );
      if ( pso_index[v] >= 0 )
        w[a][pso_index[v]] = dist[v];
    }
  }
  return w;
}

/* true when no register cycle is longer than `loop` times its register count */
inline bool loop_depth_feasible( const std::vector<std::vector<long>>& w, long loop )
{
  std::size_t r = w.size();
  std::vector<long> dist( r, 0 );
  for ( std::size_t pass = 0; pass <= r; ++pass )
  {
    bool changed = false;
    for ( std::size_t a = 0; a < r; ++a )
    {
      for ( std::size_t b = 0; b < r; ++b )
      {
        if ( w[a][b] >= 0 && dist[a] + w[a][b] - loop > dist[b] )
        {
          dist[b] = dist[a] + w[a][b] - loop;
          changed = true;
        }
      }
    }
    if ( !changed )
      return true;
  }
  return false;
}

} // namespace detail

/*! \brief Smallest multiple of `n_phases` that every register feedback loop fits into. */
inline int min_feasible_d_loop( const circuit_dag& dag, int n_phases )
{
  if ( n_phases < 1 )
    throw error( error_category::parameter, "number of phases must be >= 1" );
  if ( dag.register_pairs.empty() )
    return n_phases;
  auto w = detail::register_path_lengths( dag, topological_order( dag ) );
  long hi = 1;
  for ( auto const& row : w )
    for ( long x : row )
      hi = std::max( hi, x );
  long lo_k = 1, hi_k = ( hi + n_phases - 1 ) / n_phases;
  while ( lo_k < hi_k )
  {
    long mid = ( lo_k + hi_k ) / 2;
    if ( detail::loop_depth_feasible( w, mid * n_phases ) )
      hi_k = mid;
    else
      lo_k = mid + 1;
  }
  return static_cast<int>( lo_k * n_phases );
}

/*! \brief Longest-path phase depths for a given loop depth, with all outputs raised to the deepest one.

  This is the as-soon-as-possible schedule; it satisfies every depth constraint of the formulation.
*/
inline std::vector<long> asap_depths( const circuit_dag& dag, int d_loop )
{
  auto topo = topological_order( dag );
  std::vector<long> depth( dag.num_nodes(), 1 );
  for ( std::size_t pass = 0;; ++pass )
  {
    if ( pass > dag.register_pairs.size() + 1 )
      throw error( error_category::parameter, "loop depth " + std::to_string( d_loop ) + " is too small for the register feedback loops" );
    for ( int v : topo )
    {
      for ( int e : dag.fanin_edges[v] )
        depth[v] = std::max( depth[v], depth[dag.edges[e].src] + 1 );
    }
    bool changed = false;
    for ( auto const& [pso, psi] : dag.register_pairs )
    {
      if ( depth[pso] - d_loop > depth[psi] )
      {
        depth[psi] = depth[pso] - d_loop;
        changed = true;
      }
      depth[pso] = std::max( depth[pso], depth[psi] + d_loop );
    }
    if ( !changed )
      break;
  }
  long out = 1;
  for ( int po : dag.pos )
    out = std::max( out, depth[po] );
  for ( int po : dag.pos )
    depth[po] = out;
  return depth;
}

/*! \brief Minimal DFF count on a connection of depth span `delta` with window `window`: ceil(delta / W) - 1. */
inline long dffs_for_span( long delta, int window )
{
  return ( delta + window - 1 ) / window - 1;
}

/*! \brief Builds the clocking instance for `dag`.

  \param n_phases     number of clock phases N >= 1
  \param d_loop       phase depth of every register loop; a multiple of N
  \param hold_safe    use window N - 1 so that connected elements never share a phase
  \param fanout_aware share inserted DFFs as one tapped pipeline per driver
*/
inline problem_instance formulate( const circuit_dag& dag, int n_phases, int d_loop, bool hold_safe, bool fanout_aware )
{
  if ( n_phases < 1 )
    throw error( error_category::parameter, "number of phases must be >= 1" );
  if ( hold_safe && n_phases < 2 )
    throw error( error_category::parameter, "hold-safe clocking needs at least 2 phases" );
  if ( d_loop < n_phases || d_loop % n_phases != 0 )
    throw error( error_category::parameter, "loop depth " + std::to_string( d_loop ) + " must be a multiple of N = " + std::to_string( n_phases ) );
  if ( dag.pos.empty() )
    throw error( error_category::parameter, "circuit has no primary outputs" );
  if ( !dag.register_pairs.empty() )
  {
    int needed = min_feasible_d_loop( dag, n_phases );
    if ( d_loop < needed )
      throw error( error_category::parameter, "loop depth " + std::to_string( d_loop ) + " is too small for the register feedback loops (needs >= " + std::to_string( needed ) + ")" );
  }

  problem_instance inst;
  inst.n_phases = n_phases;
  inst.d_loop = d_loop;
  inst.hold_safe = hold_safe;
  inst.fanout_aware = fanout_aware;
  inst.window = hold_safe ? n_phases - 1 : n_phases;
  inst.num_pis = dag.pis.size();
  inst.num_pos = dag.pos.size();
  inst.po_nodes = dag.pos;
  inst.num_registers = dag.register_pairs.size();
  const double w = inst.window;
  auto& m = inst.model;

  // variable order follows the topological order of the graph
  inst.depth_var.assign( dag.num_nodes(), -1 );
  for ( int v : topological_order( dag ) )
    inst.depth_var[v] = m.add_variable( { "D_" + dag.nodes[v].name, 1.0, infinity, 0.0, true, var_kind::depth, v } );
  inst.outputs_var = m.add_variable( { "Dout", 1.0, infinity, 0.0, true, var_kind::outputs_depth, -1 } );

  inst.edge_var.resize( dag.num_edges() );
  for ( auto const& ed : dag.edges )
    inst.edge_ends.emplace_back( ed.src, ed.dst );
  for ( std::size_t e = 0; e < dag.num_edges(); ++e )
  {
    auto const& ed = dag.edges[e];
    // with sharing, C_ij only bounds the tap; its value is recomputed from the depths afterwards
    inst.edge_var[e] = m.add_variable( { "C_" + dag.nodes[ed.src].name + "~" + dag.nodes[ed.dst].name, 0.0, infinity,
                                         fanout_aware ? 0.0 : 1.0, !fanout_aware, var_kind::edge_cost, static_cast<int>( e ) } );
  }
  inst.driver_var.assign( dag.num_nodes(), -1 );
  if ( fanout_aware )
  {
    for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
    {
      if ( !dag.fanout_edges[v].empty() )
        inst.driver_var[v] = m.add_variable( { "C_" + dag.nodes[v].name, 0.0, infinity, 1.0, true, var_kind::driver_cost, static_cast<int>( v ) } );
    }
  }

  for ( std::size_t e = 0; e < dag.num_edges(); ++e )
  {
    int di = inst.depth_var[dag.edges[e].src], dj = inst.depth_var[dag.edges[e].dst];
    auto k = std::to_string( e );
    m.add_row( { "lo_" + k, { { dj, 1.0 }, { di, -1.0 } }, row_sense::ge, 1.0 } );
    m.add_row( { "up_" + k, { { dj, 1.0 }, { di, -1.0 }, { inst.edge_var[e], -w } }, row_sense::le, w } );
  }
  for ( int v : dag.pis )
    m.add_row( { "pi_" + dag.nodes[v].name, { { inst.depth_var[v], 1.0 } }, row_sense::eq, 1.0 } );
  for ( int v : dag.pos )
    m.add_row( { "po_" + dag.nodes[v].name, { { inst.depth_var[v], 1.0 }, { inst.outputs_var, -1.0 } }, row_sense::eq, 0.0 } );
  for ( auto const& [pso, psi] : dag.register_pairs )
    m.add_row( { "loop_" + dag.nodes[psi].origin, { { inst.depth_var[pso], 1.0 }, { inst.depth_var[psi], -1.0 } }, row_sense::eq, static_cast<double>( d_loop ) } );
  if ( fanout_aware )
  {
    for ( std::size_t e = 0; e < dag.num_edges(); ++e )
      m.add_row( { "fo_" + std::to_string( e ), { { inst.edge_var[e], 1.0 }, { inst.driver_var[dag.edges[e].src], -1.0 } }, row_sense::le, 0.0 } );
  }

  auto depth = asap_depths( dag, d_loop );
  inst.start.assign( m.num_vars(), 0.0 );
  for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
    inst.start[inst.depth_var[v]] = static_cast<double>( depth[v] );
  inst.start[inst.outputs_var] = static_cast<double>( depth[dag.pos.front()] );
  for ( std::size_t e = 0; e < dag.num_edges(); ++e )
  {
    auto c = static_cast<double>( dffs_for_span( depth[dag.edges[e].dst] - depth[dag.edges[e].src], inst.window ) );
    inst.start[inst.edge_var[e]] = c;
    if ( fanout_aware )
    {
      auto& ci = inst.start[inst.driver_var[dag.edges[e].src]];
      ci = std::max( ci, c );
    }
  }
  return inst;
}

/*! \brief Complete integral point for given depths: minimal edge counts, driver counts as their maximum. */
inline std::vector<double> integral_point( const problem_instance& inst, const std::vector<long>& depths )
{
  std::vector<double> x( inst.model.num_vars(), 0.0 );
  for ( std::size_t v = 0; v < inst.depth_var.size(); ++v )
    x[inst.depth_var[v]] = static_cast<double>( depths[v] );
  long out = 1;
  for ( int po : inst.po_nodes )
    out = std::max( out, depths[po] );
  x[inst.outputs_var] = static_cast<double>( out );
  for ( std::size_t e = 0; e < inst.edge_ends.size(); ++e )
  {
    auto [i, j] = inst.edge_ends[e];
    auto c = static_cast<double>( std::max( 0L, dffs_for_span( depths[j] - depths[i], inst.window ) ) );
    x[inst.edge_var[e]] = c;
    if ( inst.fanout_aware )
      x[inst.driver_var[i]] = std::max( x[inst.driver_var[i]], c );
  }
  return x;
}

/*! \brief Single-clock full path balancing: the N = 1 instance. */
inline problem_instance formulate_fpb( const circuit_dag& dag, int d_loop )
{
  return formulate( dag, 1, d_loop, false, false );
}

} // namespace mphase
