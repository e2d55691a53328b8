#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace mphase;
using namespace mphase::test;

namespace
{

int node_named( const circuit_dag& dag, std::string_view name )
{
  for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
    if ( dag.nodes[v].name == name )
      return static_cast<int>( v );
  FAIL( "no node " << name );
  return -1;
}

bool order_ok( const circuit_dag& dag, const std::vector<int>& order )
{
  if ( order.size() != dag.num_nodes() )
    return false;
  std::vector<std::size_t> pos( dag.num_nodes() );
  for ( std::size_t k = 0; k < order.size(); ++k )
    pos[order[k]] = k;
  return std::all_of( dag.edges.begin(), dag.edges.end(), [&]( const dag_edge& e ) { return pos[e.src] < pos[e.dst]; } );
}

} // namespace

TEST_CASE( "1-AND graph", "[dag]" )
{
  auto dag = build_dag( parse_bench( and1 ) );
  CHECK( dag.num_nodes() == 4 );
  CHECK( dag.num_edges() == 3 );
  CHECK( dag.pis.size() == 2 );
  CHECK( dag.pos.size() == 1 );
  CHECK( dag.num_gates() == 1 );
}

TEST_CASE( "registers split into PSI/PSO", "[dag]" )
{
  auto dag = build_dag( parse_bench( "INPUT(a)\nOUTPUT(c)\nq = DFF(c)\nc = AND(q, a)\n" ) );
  REQUIRE( dag.register_pairs.size() == 1 );
  auto [pso, psi] = dag.register_pairs[0];
  CHECK( dag.nodes[psi].kind == node_kind::psi );
  CHECK( dag.nodes[pso].kind == node_kind::pso );
  int c = node_named( dag, "c" );
  CHECK( dag.find_edge( psi, c ) >= 0 );
  CHECK( dag.find_edge( c, pso ) >= 0 );
  CHECK( order_ok( dag, topological_order( dag ) ) );

  // PI straight into a register, register straight to an output
  auto d2 = build_dag( parse_bench( "INPUT(a)\nOUTPUT(q)\nq = DFF(a)\n" ) );
  auto [o, i] = d2.register_pairs[0];
  CHECK( d2.find_edge( d2.pis[0], o ) >= 0 );
  CHECK( d2.find_edge( i, d2.pos[0] ) >= 0 );
}

TEST_CASE( "combinational cycles are reported", "[dag]" )
{
  auto ntk = parse_bench( "INPUT(a)\nOUTPUT(c)\nc = AND(a, d)\nd = NOT(c)\n" );
  try
  {
    build_dag( ntk );
    FAIL( "accepted a cycle" );
  }
  catch ( const error& e )
  {
    CHECK( e.category() == error_category::structure );
    std::string msg = e.what();
    CHECK( msg.find( "cycle" ) != std::string::npos );
    CHECK( msg.find( "c" ) != std::string::npos );
    CHECK( msg.find( "d" ) != std::string::npos );
  }
}

TEST_CASE( "dangling nets are reported", "[dag]" )
{
  CHECK_THROWS_AS( build_dag( parse_bench( "INPUT(a)\nOUTPUT(c)\nc = NOT(a)\nx = NOT(a)\n" ) ), error );
}

TEST_CASE( "repeated fanins collapse into one edge", "[dag]" )
{
  auto dag = build_dag( parse_bench( "INPUT(a)\nOUTPUT(c)\nc = XOR(a, a)\n" ) );
  REQUIRE( dag.num_edges() == 2 );
  int e = dag.find_edge( dag.pis[0], node_named( dag, "c" ) );
  CHECK( dag.edges[e].multiplicity == 2 );
  CHECK( dag.nodes[node_named( dag, "c" )].fanin_nodes.size() == 2 );
}

TEST_CASE( "topological order on chain and diamond", "[dag]" )
{
  auto chain = build_dag( parse_bench( "INPUT(a)\nOUTPUT(c)\nb = NOT(a)\nc = NOT(b)\n" ) );
  auto order = topological_order( chain );
  std::vector<std::string> names;
  for ( int v : order )
    names.push_back( chain.nodes[v].name );
  CHECK( names == std::vector<std::string>{ "a", "b", "c", "c$po" } );

  auto diamond = build_dag( parse_bench( "INPUT(a)\nOUTPUT(d)\nb = NOT(a)\nc = BUFF(a)\nd = OR(b, c)\n" ) );
  auto o2 = topological_order( diamond );
  CHECK( diamond.nodes[o2.front()].name == "a" );
  CHECK( diamond.nodes[o2[o2.size() - 2]].name == "d" );
  CHECK( order_ok( diamond, o2 ) );
}

TEST_CASE( "node count and order on bundled and random netlists", "[dag][property]" )
{
  auto check = [&]( const netlist& ntk ) {
    auto dag = build_dag( ntk );
    CHECK( dag.num_nodes() == ntk.inputs.size() + ntk.outputs.size() + ntk.num_gates() + 2 * ntk.num_registers() );
    CHECK( order_ok( dag, topological_order( dag ) ) );
    std::size_t fanins = 0;
    for ( auto const& e : dag.edges )
      fanins += e.multiplicity;
    std::size_t expect = ntk.outputs.size();
    for ( auto const& c : ntk.cells )
      expect += c.fanins.size();
    CHECK( fanins == expect );
  };
  for ( auto const& name : bundled_names() )
    check( bundled( name ) );
  std::mt19937_64 rng( 7 );
  for ( int k = 0; k < 200; ++k )
    check( random_netlist( rng, 1 + k % 5, 1 + k % 23, k % 4 ) );
}

TEST_CASE( "DOT export names every node", "[dag]" )
{
  auto dag = build_dag( bundled( "s27" ) );
  auto dot = to_dot( dag );
  CHECK( dot.rfind( "digraph", 0 ) == 0 );
  for ( auto const& n : dag.nodes )
    CHECK( dot.find( n.name ) != std::string::npos );
}
