/*!
  \file dag.hpp
  \brief Optimization graph of a netlist

  Registers are split into a pseudo-input (PSI, the register output) and a
  pseudo-output (PSO, the register input) so that the graph is acyclic.
  Primary outputs get their own interface node. Wires and splitters become
  edges; parallel connections between the same pair of nodes collapse into a
  single edge with a multiplicity.
*/

#pragma once

#include "error.hpp"
#include "netlist.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace mphase
{

enum class node_kind : std::uint8_t
{
  pi,
  po,
  psi,
  pso,
  gate
};

inline std::string_view to_string( node_kind k )
{
  switch ( k )
  {
  case node_kind::pi: return "PI";
  case node_kind::po: return "PO";
  case node_kind::psi: return "PSI";
  case node_kind::pso: return "PSO";
  case node_kind::gate: return "GATE";
  }
  return "?";
}

struct dag_node
{
  node_kind kind;
  gate_op op = gate_op::buff; // meaningful for gates only
  std::string name;           // unique node name, used for variable names
  std::string origin;         // net / cell name in the source netlist
  std::vector<int> fanin_nodes; // driver node per fanin slot, in slot order
};

struct dag_edge
{
  int src;
  int dst;
  int multiplicity = 1;
};

struct circuit_dag
{
  std::string name;
  std::vector<dag_node> nodes;
  std::vector<dag_edge> edges;
  /*! \brief (pso, psi) per register, in netlist order. */
  std::vector<std::pair<int, int>> register_pairs;
  std::vector<int> pis;
  std::vector<int> pos;
  std::vector<std::vector<int>> fanout_edges; // edge ids per source node
  std::vector<std::vector<int>> fanin_edges;  // edge ids per sink node

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_edges() const { return edges.size(); }
  std::size_t num_gates() const
  {
    return static_cast<std::size_t>( std::count_if( nodes.begin(), nodes.end(), []( const dag_node& n ) { return n.kind == node_kind::gate; } ) );
  }

  /*! \brief Edge id for (src, dst) or -1. */
  int find_edge( int src, int dst ) const
  {
    for ( int e : fanout_edges[src] )
    {
      if ( edges[e].dst == dst )
        return e;
    }
    return -1;
  }
};

namespace detail
{

inline std::vector<int> kahn_order( const circuit_dag& dag )
{
  std::vector<int> indeg( dag.num_nodes(), 0 );
  for ( auto const& e : dag.edges )
    ++indeg[e.dst];
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for ( int v = 0; v < static_cast<int>( dag.num_nodes() ); ++v )
  {
    if ( indeg[v] == 0 )
      ready.push( v );
  }
  std::vector<int> order;
  order.reserve( dag.num_nodes() );
  while ( !ready.empty() )
  {
    int v = ready.top();
    ready.pop();
    order.push_back( v );
    for ( int e : dag.fanout_edges[v] )
    {
      if ( --indeg[dag.edges[e].dst] == 0 )
        ready.push( dag.edges[e].dst );
    }
  }
  return order;
}

/* one cycle among the nodes Kahn's algorithm could not order */
inline std::vector<int> find_cycle( const circuit_dag& dag, const std::vector<bool>& ordered )
{
  std::vector<int> state( dag.num_nodes(), 0 ), parent( dag.num_nodes(), -1 );
  for ( int root = 0; root < static_cast<int>( dag.num_nodes() ); ++root )
  {
    if ( ordered[root] || state[root] )
      continue;
    std::vector<std::pair<int, std::size_t>> stack{ { root, 0 } };
    state[root] = 1;
    while ( !stack.empty() )
    {
      auto& [v, next] = stack.back();
      if ( next == dag.fanout_edges[v].size() )
      {
        state[v] = 2;
        stack.pop_back();
        continue;
      }
      int w = dag.edges[dag.fanout_edges[v][next++]].dst;
      if ( ordered[w] )
        continue;
      if ( state[w] == 1 )
      {
        std::vector<int> cycle{ w };
        for ( int u = v; u != w; u = parent[u] )
          cycle.push_back( u );
        std::reverse( cycle.begin() + 1, cycle.end() );
        return cycle;
      }
      if ( state[w] == 0 )
      {
        state[w] = 1;
        parent[w] = v;
        stack.emplace_back( w, 0 );
      }
    }
  }
  return {};
}

} // namespace detail

/*! \brief Builds the optimization graph of a netlist.

  Node order: primary inputs, then one node per gate (or a PSI/PSO pair per
  register) in cell order, then primary outputs.
*/
inline circuit_dag build_dag( const netlist& ntk )
{
  validate( ntk );

  circuit_dag dag;
  dag.name = ntk.name;
  std::unordered_map<std::string, int> driver; // net -> node driving it

  auto add_node = [&]( node_kind kind, std::string name, std::string origin, gate_op op = gate_op::buff ) {
    dag.nodes.push_back( dag_node{ kind, op, std::move( name ), std::move( origin ), {} } );
    return static_cast<int>( dag.nodes.size() ) - 1;
  };

  for ( auto const& in : ntk.inputs )
  {
    int v = add_node( node_kind::pi, in, in );
    dag.pis.push_back( v );
    driver[in] = v;
  }
  std::vector<int> sink_of_cell( ntk.cells.size() );
  for ( std::size_t i = 0; i < ntk.cells.size(); ++i )
  {
    auto const& c = ntk.cells[i];
    if ( c.op == gate_op::dff )
    {
      int psi = add_node( node_kind::psi, c.output + "$psi", c.output );
      int pso = add_node( node_kind::pso, c.output + "$pso", c.output );
      dag.register_pairs.emplace_back( pso, psi );
      driver[c.output] = psi;
      sink_of_cell[i] = pso;
    }
    else
    {
      int v = add_node( node_kind::gate, c.output, c.output, c.op );
      driver[c.output] = v;
      sink_of_cell[i] = v;
    }
  }
  for ( auto const& out : ntk.outputs )
    dag.pos.push_back( add_node( node_kind::po, po_id( out ), out ) );

  dag.fanout_edges.resize( dag.num_nodes() );
  dag.fanin_edges.resize( dag.num_nodes() );
  auto connect = [&]( int src, int dst ) {
    dag.nodes[dst].fanin_nodes.push_back( src );
    if ( int e = dag.find_edge( src, dst ); e >= 0 )
    {
      ++dag.edges[e].multiplicity;
      return;
    }
    dag.edges.push_back( dag_edge{ src, dst, 1 } );
    int e = static_cast<int>( dag.edges.size() ) - 1;
    dag.fanout_edges[src].push_back( e );
    dag.fanin_edges[dst].push_back( e );
  };
  for ( std::size_t i = 0; i < ntk.cells.size(); ++i )
  {
    for ( auto const& f : ntk.cells[i].fanins )
      connect( driver.at( f ), sink_of_cell[i] );
  }
  for ( std::size_t k = 0; k < ntk.outputs.size(); ++k )
    connect( driver.at( ntk.outputs[k] ), dag.pos[k] );

  for ( auto const& n : dag.nodes )
  {
    if ( ( n.kind == node_kind::gate || n.kind == node_kind::psi ) && dag.fanout_edges[&n - dag.nodes.data()].empty() )
      throw error( error_category::structure, "net '" + n.origin + "' is dangling (drives no cell and no output)" );
  }

  auto order = detail::kahn_order( dag );
  if ( order.size() != dag.num_nodes() )
  {
    std::vector<bool> ordered( dag.num_nodes(), false );
    for ( int v : order )
      ordered[v] = true;
    std::string names;
    for ( int v : detail::find_cycle( dag, ordered ) )
      names += ( names.empty() ? "" : " -> " ) + dag.nodes[v].origin;
    throw error( error_category::structure, "combinational cycle: " + names );
  }
  return dag;
}

/*! \brief Deterministic topological order; ties are broken by the smaller node id. */
inline std::vector<int> topological_order( const circuit_dag& dag )
{
  return detail::kahn_order( dag );
}

/*! \brief DOT rendering of the graph, optionally labeled with depths. */
inline std::string to_dot( const circuit_dag& dag, const std::vector<long>* depths = nullptr )
{
  std::ostringstream os;
  os << "digraph \"" << ( dag.name.empty() ? "circuit" : dag.name ) << "\" {\n  rankdir=LR;\n";
  for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
  {
    auto const& n = dag.nodes[v];
    const char* shape = n.kind == node_kind::gate ? "box" : n.kind == node_kind::pi || n.kind == node_kind::psi ? "invtriangle" : "triangle";
    os << "  n" << v << " [shape=" << shape << ", label=\"" << n.name;
    if ( n.kind == node_kind::gate )
      os << "\\n" << to_string( n.op );
    if ( depths )
      os << "\\nD=" << ( *depths )[v];
    os << "\"];\n";
  }
  for ( auto const& e : dag.edges )
  {
    os << "  n" << e.src << " -> n" << e.dst;
    if ( e.multiplicity > 1 )
      os << " [label=\"x" << e.multiplicity << "\"]";
    os << ";\n";
  }
  for ( auto const& [pso, psi] : dag.register_pairs )
    os << "  n" << pso << " -> n" << psi << " [style=dashed, constraint=false];\n";
  os << "}\n";
  return os.str();
}

} // namespace mphase
