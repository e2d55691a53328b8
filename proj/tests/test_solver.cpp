#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace mphase;
using namespace mphase::test;

namespace
{

/* min C s.t. 1 <= D2 - D1 <= 2(C+1), D1 = 1, D2 = 4 */
lp_model half_model( bool integral )
{
  lp_model m;
  int d1 = m.add_variable( { "D1", 1, infinity, 0, integral } );
  int d2 = m.add_variable( { "D2", 1, infinity, 0, integral } );
  int c = m.add_variable( { "C", 0, infinity, 1, integral } );
  m.add_row( { "lo", { { d2, 1 }, { d1, -1 } }, row_sense::ge, 1 } );
  m.add_row( { "up", { { d2, 1 }, { d1, -1 }, { c, -2 } }, row_sense::le, 2 } );
  m.add_row( { "p1", { { d1, 1 } }, row_sense::eq, 1 } );
  m.add_row( { "p2", { { d2, 1 } }, row_sense::eq, 4 } );
  return m;
}

void check_solution( const lp_model& m, const solution& s )
{
  REQUIRE( s.has_values() );
  CHECK( m.max_violation( s.values ) <= 1e-6 );
  CHECK( m.objective( s.values ) == Catch::Approx( s.objective ).margin( 1e-6 ) );
}

} // namespace

TEST_CASE( "fractional relaxation", "[solver]" )
{
  auto m = half_model( true );
  auto lp = solve_lp( m );
  REQUIRE( lp.status == solve_status::optimal );
  CHECK( lp.objective == Catch::Approx( 0.5 ) );
  CHECK( lp.values[2] == Catch::Approx( 0.5 ) );
  check_solution( m, lp );

  auto ilp = solve_ilp( m );
  REQUIRE( ilp.status == solve_status::optimal );
  CHECK( ilp.objective == Catch::Approx( 1 ) );
  CHECK( ilp.values[1] == Catch::Approx( 4 ) );
  check_solution( m, ilp );
}

TEST_CASE( "integral relaxation needs no branching", "[solver]" )
{
  auto dag = build_dag( bundled( "c17" ) );
  auto inst = formulate_fpb( dag, 1 );
  auto ilp = solve_ilp( inst );
  REQUIRE( ilp.status == solve_status::optimal );
  CHECK( ilp.stats.nodes == 0 );
  CHECK( ilp.objective == Catch::Approx( solve_lp( inst ).objective ) );
}

TEST_CASE( "infeasible and unbounded models", "[solver]" )
{
  lp_model m;
  int x = m.add_variable( { "x", 0, 3, 1, true } );
  m.add_row( { "r", { { x, 2 } }, row_sense::eq, 3 } );
  CHECK( solve_lp( m ).status == solve_status::optimal );
  CHECK( solve_ilp( m ).status == solve_status::infeasible );

  lp_model e;
  int y = e.add_variable( { "y", 0, 1, 1, false } );
  e.add_row( { "r", { { y, 1 } }, row_sense::ge, 2 } );
  CHECK( solve_lp( e ).status == solve_status::infeasible );
}

TEST_CASE( "random small ILPs match brute force", "[solver][oracle]" )
{
  std::mt19937_64 rng( 2024 );
  int feasible = 0;
  for ( int k = 0; k < 300; ++k )
  {
    auto m = random_ilp( rng );
    double oracle = brute_force( m );
    auto s = solve_ilp( m );
    INFO( "instance " << k << "\n" << export_lp_format( m ) );
    if ( std::isnan( oracle ) )
    {
      CHECK( s.status == solve_status::infeasible );
      continue;
    }
    ++feasible;
    REQUIRE( s.status == solve_status::optimal );
    CHECK( s.objective == Catch::Approx( oracle ).margin( 1e-6 ) );
    check_solution( m, s );
    auto lp = solve_lp( m );
    REQUIRE( lp.status == solve_status::optimal );
    CHECK( lp.objective <= s.objective + 1e-6 );
  }
  CHECK( feasible > 100 );
}

TEST_CASE( "LP <= ILP <= rounded LP on bundled benchmarks", "[solver]" )
{
  for ( auto const& name : bundled_names() )
  {
    auto dag = build_dag( bundled( name ) );
    for ( int n = 2; n <= 3; ++n )
    {
      auto inst = formulate( dag, n, min_feasible_d_loop( dag, n ), false, false );
      auto lp = solve_lp( inst );
      check_solution( inst.model, lp );
      auto rounded = round_solution( inst, lp );
      long rounded_cost = count_inserted( dag, recompute_edge_costs( rounded, dag, n, false ), false );
      auto ilp = solve_ilp( inst, 300.0, integral_point( inst, rounded ) );
      INFO( name << " N=" << n );
      REQUIRE( ilp.has_values() );
      check_solution( inst.model, ilp );
      CHECK( inst.model.is_feasible_integral( ilp.values ) );
      CHECK( lp.objective <= ilp.objective + 1e-6 );
      CHECK( ilp.objective <= rounded_cost + 1e-6 );
    }
  }
}

TEST_CASE( "warm start never worsens the objective", "[solver]" )
{
  for ( auto const& name : { "c17", "s27", "alu4", "acc4" } )
  {
    auto dag = build_dag( bundled( name ) );
    auto inst = formulate( dag, 2, min_feasible_d_loop( dag, 2 ), false, false );
    auto lp = solve_lp( inst );
    auto warm = integral_point( inst, round_solution( inst, lp ) );
    auto ws = solve_ilp( inst, 300.0, warm );
    REQUIRE( ws.has_values() );
    CHECK( ws.objective <= inst.model.objective( warm ) + 1e-6 );
    CHECK( ws.objective == Catch::Approx( solve_ilp( inst ).objective ) );
  }
}

TEST_CASE( "node limit keeps the incumbent", "[solver]" )
{
  auto dag = build_dag( bundled( "mult4" ) );
  auto inst = formulate( dag, 2, 2, false, false );
  auto warm = integral_point( inst, asap_depths( dag, 2 ) );
  auto s = solve_ilp( inst, 300.0, warm, 0 );
  REQUIRE( s.has_values() );
  CHECK( s.objective <= inst.model.objective( warm ) + 1e-6 );
  CHECK( s.bound <= s.objective + 1e-6 );
}

TEST_CASE( "rounding", "[solver]" )
{
  auto dag = build_dag( parse_bench( "INPUT(a)\nOUTPUT(c)\nb = NOT(a)\nc = NOT(b)\n" ) );
  auto inst = formulate( dag, 2, 2, false, false );
  solution s;
  s.status = solve_status::optimal;
  s.values.assign( inst.model.num_vars(), 0.0 );
  std::vector<double> d = { 1.0, 2.5, 3.5, 4.5 };
  for ( std::size_t v = 0; v < 4; ++v )
    s.values[inst.depth_var[v]] = d[v];
  s.values[inst.outputs_var] = 4.5;
  CHECK( round_solution( inst, s ) == std::vector<long>{ 1, 3, 4, 5 } );

  // equal fractional outputs stay equal
  auto two = build_dag( parse_bench( "INPUT(a)\nOUTPUT(b)\nOUTPUT(c)\nb = NOT(a)\nc = BUFF(a)\n" ) );
  auto i2 = formulate( two, 2, 2, false, false );
  solution s2;
  s2.status = solve_status::optimal;
  s2.values.assign( i2.model.num_vars(), 0.0 );
  for ( std::size_t v = 0; v < two.num_nodes(); ++v )
    s2.values[i2.depth_var[v]] = v == 0 ? 1.0 : two.nodes[v].kind == node_kind::po ? 6.2 : 2.3;
  s2.values[i2.outputs_var] = 6.2;
  auto r2 = round_solution( i2, s2 );
  CHECK( r2[two.pos[0]] == 7 );
  CHECK( r2[two.pos[1]] == 7 );

  // register pair keeps its offset
  auto reg = build_dag( parse_bench( "INPUT(a)\nOUTPUT(g)\ng = AND(q, a)\nq = DFF(g)\n" ) );
  auto i3 = formulate( reg, 2, 4, false, false );
  auto [pso, psi] = reg.register_pairs[0];
  solution s3;
  s3.status = solve_status::optimal;
  s3.values.assign( i3.model.num_vars(), 0.0 );
  s3.values[i3.depth_var[reg.pis[0]]] = 1.0;
  s3.values[i3.depth_var[psi]] = 2.4;
  s3.values[i3.depth_var[reg.pos[0]]] = 4.5;
  s3.values[i3.outputs_var] = 4.5;
  for ( std::size_t v = 0; v < reg.num_nodes(); ++v )
    if ( reg.nodes[v].name == "g" )
      s3.values[i3.depth_var[v]] = 3.4;
  s3.values[i3.depth_var[pso]] = 6.4;
  auto r3 = round_solution( i3, s3 );
  CHECK( r3[pso] - r3[psi] == 4 );
}

TEST_CASE( "rounded relaxations are feasible", "[solver][property]" )
{
  std::mt19937_64 rng( 3 );
  for ( int k = 0; k < 60; ++k )
  {
    auto dag = build_dag( random_netlist( rng, 2 + k % 3, 3 + k % 19, k % 3 ) );
    int n = 1 + k % 4;
    bool hs = n > 1 && k % 2;
    auto inst = formulate( dag, n, min_feasible_d_loop( dag, n ), hs, k % 3 == 0 );
    auto lp = solve_lp( inst );
    REQUIRE( lp.status == solve_status::optimal );
    auto d = round_solution( inst, lp );
    CHECK( inst.model.is_feasible_integral( integral_point( inst, d ) ) );
  }
}

TEST_CASE( "LP export", "[solver]" )
{
  auto dag = build_dag( parse_bench( "INPUT(a)\nOUTPUT(b)\nb = NOT(a)\n" ) );
  auto text = export_lp_format( formulate( dag, 2, 2, false, false ) );
  for ( auto s : { "Minimize", "Subject To", "Bounds", "General", "End" } )
    CHECK( text.find( s ) != std::string::npos );
  CHECK( text.find( "D_a" ) != std::string::npos );
  CHECK( text.find( "C_a~b" ) != std::string::npos );

  auto relaxed = export_lp_format( formulate( dag, 2, 2, false, false ), false );
  CHECK( relaxed.find( "General" ) == std::string::npos );

  // fanout-aware: C_i in the objective, C_ij only in constraints
  auto fo = build_dag( parse_bench( "INPUT(a)\nOUTPUT(b)\nOUTPUT(c)\nb = NOT(a)\nc = BUFF(a)\n" ) );
  auto t2 = export_lp_format( formulate( fo, 2, 2, false, true ) );
  auto obj = t2.substr( 0, t2.find( "Subject To" ) );
  CHECK( obj.find( "C_a " ) != std::string::npos );
  CHECK( obj.find( "C_a~" ) == std::string::npos );
  CHECK( t2.find( "C_a~b" ) != std::string::npos );
}
