#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace mphase;
using namespace mphase::test;

namespace
{

/* a -> g -> PO, edge a -> g spans delta */
struct one_edge
{
  circuit_dag dag = build_dag( parse_bench( "INPUT(a)\nOUTPUT(g)\ng = NOT(a)\n" ) );
  std::vector<long> depth;

  one_edge( long delta ) : depth{ 1, 1 + delta, 2 + delta } {}
};

} // namespace

TEST_CASE( "stage and phase of a depth", "[assignment]" )
{
  CHECK( stage_of_depth( 5, 2 ) == 3 );
  CHECK( clock_of_depth( 5, 2 ) == 1 );
  for ( int n = 1; n <= 5; ++n )
  {
    CHECK( stage_of_depth( 1, n ) == 1 );
    CHECK( clock_of_depth( 1, n ) == 1 );
  }
  CHECK( stage_of_depth( 6, 3 ) == 2 );
  CHECK( clock_of_depth( 6, 3 ) == 3 );

  for ( int n = 1; n <= 6; ++n )
    for ( long d = 1; d <= 40; ++d )
    {
      auto s = stage_of_depth( d, n );
      CHECK( s == ( d + n - 1 ) / n );
      CHECK( clock_of_depth( d, n ) == d - s * n + n );
      CHECK( clock_of_depth( d + n, n ) == clock_of_depth( d, n ) );
    }
}

TEST_CASE( "phase extraction records latency", "[assignment]" )
{
  std::vector<long> d = { 1, 2, 5, 7 };
  auto pa = extract_phases( d, 2 );
  CHECK( pa.stage == std::vector<long>{ 1, 1, 3, 4 } );
  CHECK( pa.phase == std::vector<int>{ 1, 2, 1, 1 } );
  CHECK( pa.outputs_depth == 7 );
  CHECK( pa.latency == 3 );
  CHECK( pa.window() == 2 );
  CHECK( extract_phases( d, 3, true ).window() == 2 );
}

TEST_CASE( "edge costs from depths", "[assignment]" )
{
  CHECK( dffs_for_span( 2, 2 ) == 0 );
  CHECK( dffs_for_span( 7, 3 ) == 2 );
  CHECK( dffs_for_span( 3, 2 ) == 1 );
  CHECK( dffs_for_span( 1, 1 ) == 0 );

  one_edge t( 3 );
  CHECK( recompute_edge_costs( t.depth, t.dag, 3, false )[0] == 0 );
  CHECK( recompute_edge_costs( t.depth, t.dag, 3, true )[0] == 1 );

  std::vector<long> bad = { 2, 2, 3 };
  CHECK_THROWS_AS( recompute_edge_costs( bad, t.dag, 2, false ), error );
}

TEST_CASE( "baseline chain on a span of 5", "[assignment]" )
{
  one_edge t( 5 );
  auto pa = extract_phases( t.dag, t.depth, 2 );
  auto costs = recompute_edge_costs( t.depth, t.dag, 2, false );
  REQUIRE( costs[0] == 2 );
  auto plan = plan_insertion( t.dag, pa, costs, false );
  auto const& chain = plan.edge_chains[0];
  REQUIRE( chain.size() == 2 );
  CHECK( chain[0].depth == 3 );
  CHECK( chain[1].depth == 5 );
  CHECK( t.depth[1] - chain[1].depth == 1 );
  CHECK( chain[0].name == "a_pb1" );
  CHECK( chain[1].name == "a_pb2" );
}

TEST_CASE( "shared pipeline with taps", "[assignment]" )
{
  // a feeds y1 at span 5 and y2 at span 3: C = 2 and 1 at N = 2
  auto dag = build_dag( parse_bench( "INPUT(a)\nOUTPUT(y1)\nOUTPUT(y2)\ny1 = NOT(a)\ny2 = BUFF(a)\n" ) );
  std::vector<long> depth( dag.num_nodes() );
  for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
  {
    auto const& n = dag.nodes[v].name;
    depth[v] = n == "a" ? 1 : n == "y1" ? 6 : n == "y2" ? 4 : 7;
  }
  auto pa = extract_phases( dag, depth, 2 );
  auto costs = recompute_edge_costs( depth, dag, 2, false );
  CHECK( count_inserted( dag, costs, false ) == 2 + 1 + 0 + 1 );
  CHECK( count_inserted( dag, costs, true ) == 2 + 0 + 1 );

  auto shared = plan_insertion( dag, pa, costs, true );
  CHECK( shared.driver_chains[dag.pis[0]].size() == 2 );
  int e1 = dag.fanout_edges[dag.pis[0]][0], e2 = dag.fanout_edges[dag.pis[0]][1];
  CHECK( shared.taps[e1] == 2 );
  CHECK( shared.taps[e2] == 1 );
  CHECK( count_inserted( shared ) == 3 );

  auto an = insert_dffs( dag, pa, costs, true );
  auto y2 = std::find_if( an.base.cells.begin(), an.base.cells.end(), []( const cell& c ) { return c.output == "y2"; } );
  CHECK( y2->fanins == std::vector<std::string>{ "a_pb1" } );
  CHECK( count_inserted( plan_insertion( dag, pa, costs, false ) ) == 4 );
}

TEST_CASE( "hold-safe placement at N=3, span 4", "[assignment]" )
{
  one_edge t( 4 );
  auto pa = extract_phases( t.dag, t.depth, 3, true );
  auto costs = recompute_edge_costs( t.depth, t.dag, 3, true );
  REQUIRE( costs[0] == 1 );
  auto plan = plan_insertion( t.dag, pa, costs, false );
  auto const& dff = plan.edge_chains[0].at( 0 );
  CHECK( dff.depth == 3 );
  // enumerate phases hop by hop
  std::vector<int> hops = { pa.phase[0], dff.phase, pa.phase[1] };
  CHECK( hops[0] != hops[1] );
  CHECK( hops[1] != hops[2] );
  // one phase before its driver's
  CHECK( hops[1] == ( hops[0] + 3 - 2 ) % 3 + 1 );
  CHECK( check_annotated( insert_dffs( t.dag, pa, costs, false ), true ).empty() );
}

TEST_CASE( "counting", "[assignment]" )
{
  CHECK( count_inserted( insertion_plan{} ) == 0 );
  auto dag = build_dag( parse_bench( "INPUT(a)\nINPUT(b)\nOUTPUT(x)\nOUTPUT(y)\nx = NOT(a)\ny = NOT(b)\n" ) );
  std::vector<long> depth( dag.num_nodes(), 3 );
  depth[dag.pis[0]] = depth[dag.pis[1]] = 1;
  for ( int po : dag.pos )
    depth[po] = 4;
  auto costs = recompute_edge_costs( depth, dag, 1, false );
  auto plan = plan_insertion( dag, extract_phases( dag, depth, 1 ), costs, false );
  CHECK( count_inserted( plan ) == 2 );
}

TEST_CASE( "name collisions get a suffix", "[assignment]" )
{
  auto dag = build_dag( parse_bench( "INPUT(a)\nOUTPUT(y)\nOUTPUT(a_pb1)\na_pb1 = NOT(a)\nb = NOT(a_pb1)\ny = AND(a, b)\n" ) );
  std::vector<long> depth( dag.num_nodes() );
  for ( std::size_t v = 0; v < dag.num_nodes(); ++v )
  {
    auto const& n = dag.nodes[v].name;
    depth[v] = n == "a" ? 1 : n == "a_pb1" ? 2 : n == "b" ? 3 : n == "y" ? 4 : 5;
  }
  auto costs = recompute_edge_costs( depth, dag, 1, false );
  auto an = insert_dffs( dag, extract_phases( dag, depth, 1 ), costs, false );
  CHECK( an.is_inserted( "a_pb1_" ) );
  CHECK( !an.is_inserted( "a_pb1" ) );
}

TEST_CASE( "inconsistent costs are caught", "[assignment]" )
{
  one_edge t( 5 );
  auto pa = extract_phases( t.dag, t.depth, 2 );
  std::vector<long> costs = { 1, 0 };
  CHECK_THROWS_AS( plan_insertion( t.dag, pa, costs, false ), error );
}

TEST_CASE( "checker flags bad labels", "[assignment]" )
{
  one_edge t( 2 );
  auto pa = extract_phases( t.dag, t.depth, 2, true );
  auto costs = recompute_edge_costs( t.depth, t.dag, 2, true );
  auto an = insert_dffs( t.dag, pa, costs, false );
  CHECK( check_annotated( an, true ).empty() );
  auto broken = an;
  broken.phase_of["g"] = broken.phase_of["a_pb1"];
  CHECK( !check_annotated( broken, true ).empty() );
  broken = an;
  broken.depth_of["g"] += 2;
  broken.phase_of["g"] = phase_of_depth( broken.depth_of["g"], 2 );
  CHECK( !check_annotated( broken, false ).empty() );
}
