#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace mphase;
using namespace mphase::test;

namespace
{

error_category category_of( std::string_view text )
{
  try
  {
    parse_bench( text );
  }
  catch ( const error& e )
  {
    return e.category();
  }
  FAIL( "no error for:\n" << text );
  return error_category::io;
}

annotated_netlist clocked( const netlist& ntk, int n, variant mode )
{
  run_options o;
  o.n_phases = n;
  o.mode = mode;
  o.solver = solver_choice::lp;
  return run_pipeline( ntk, o ).annotated;
}

} // namespace

TEST_CASE( "minimal netlists parse", "[bench_io]" )
{
  auto ntk = parse_bench( and1 );
  CHECK( ntk.inputs == std::vector<std::string>{ "a", "b" } );
  CHECK( ntk.outputs == std::vector<std::string>{ "c" } );
  REQUIRE( ntk.cells.size() == 1 );
  CHECK( ntk.cells[0].op == gate_op::and_ );
  CHECK( ntk.cells[0].fanins == std::vector<std::string>{ "a", "b" } );

  auto reg = parse_bench( "INPUT(a)\nOUTPUT(q)\nq = DFF(a)" );
  CHECK( reg.num_registers() == 1 );
  CHECK( reg.num_gates() == 0 );
}

TEST_CASE( "comments, blank lines and CRLF", "[bench_io]" )
{
  auto ntk = parse_bench( "# c17-like\r\n\r\nINPUT(a)  # first\r\nINPUT(b)\r\nOUTPUT(y)\r\ny = NAND(a, b)\r\n" );
  CHECK( ntk.cells.size() == 1 );
  CHECK( ntk.cells[0].op == gate_op::nand_ );
}

TEST_CASE( "malformed input is rejected", "[bench_io]" )
{
  CHECK( category_of( "c = AND(a)" ) == error_category::parse );
  CHECK( category_of( "INPUT(a)\nOUTPUT(c)\nc = NOT(a, a)" ) == error_category::parse );
  CHECK( category_of( "INPUT(a)\nOUTPUT(c)\nc = MAJ(a, a, a)" ) == error_category::parse );
  CHECK( category_of( "INPUT(a)\nOUTPUT(c)\nc = AND(a, b" ) == error_category::parse );
  CHECK( category_of( "INPUT(a)\nOUTPUT(c)\nc == AND(a, a)" ) == error_category::parse );
  CHECK( category_of( "INPUT(a)\nOUTPUT(c)\nc = AND(a, z)" ) == error_category::structure );
  CHECK( category_of( "INPUT(a)\nINPUT(b)\nOUTPUT(c)\nc = AND(a, b)\nc = OR(a, b)" ) == error_category::structure );
  CHECK( category_of( "INPUT(a)\nOUTPUT(c)" ) == error_category::structure );
}

TEST_CASE( "errors carry the line number", "[bench_io]" )
{
  try
  {
    parse_bench( "INPUT(a)\nOUTPUT(c)\n\nc = FOO(a, a)\n" );
    FAIL( "accepted" );
  }
  catch ( const error& e )
  {
    CHECK( e.location() == "line 4" );
  }
}

TEST_CASE( "write/parse round trip on bundled benchmarks", "[bench_io]" )
{
  for ( auto const& name : bundled_names() )
  {
    auto ntk = bundled( name );
    auto again = parse_bench( write_bench( ntk ), ntk.name );
    CHECK( again == ntk );
  }
}

TEST_CASE( "emitted 1-AND carries phase labels", "[bench_io]" )
{
  auto an = clocked( parse_bench( and1 ), 2, variant::baseline );
  auto text = emit_bench( an );
  for ( auto id : { "a", "b", "c" } )
    CHECK( text.find( std::string( "# PHASE " ) + id + " " ) != std::string::npos );
  // still loadable by a plain reader
  CHECK( parse_bench( text ).cells.size() == 1 );
}

TEST_CASE( "one inserted DFF between two gates", "[bench_io]" )
{
  // g2 sees g1 at depth 2 and b at depth 1; FPB puts one DFF on b -> g2 and one on a -> g3
  auto ntk = parse_bench( "INPUT(a)\nINPUT(b)\nOUTPUT(y)\ng1 = NOT(a)\ny = AND(g1, b)\n" );
  auto an = clocked( ntk, 1, variant::fpb );
  REQUIRE( an.inserted.size() == 1 );
  auto name = *an.inserted.begin();
  CHECK( name == "b_pb1" );
  auto text = emit_bench( an );
  CHECK( text.find( "b_pb1 = DFF(b)" ) != std::string::npos );
  CHECK( text.find( "y = AND(g1, b_pb1)" ) != std::string::npos );
}

TEST_CASE( "emit/parse identity on clocked benchmarks", "[bench_io]" )
{
  for ( auto const& name : { "c17", "s27", "acc4", "mult4" } )
  {
    for ( auto mode : { variant::baseline, variant::fanout, variant::holdsafe } )
    {
      auto an = clocked( bundled( name ), 3, mode );
      auto back = parse_annotated( emit_bench( an ), an.base.name );
      CHECK( back == an );
    }
  }
}

TEST_CASE( "malformed directives are parse errors", "[bench_io]" )
{
  CHECK_THROWS_AS( parse_annotated( std::string( and1 ) + "# PHASES x\n" ), error );
  CHECK_THROWS_AS( parse_annotated( std::string( and1 ) + "# PHASES 2\n# PHASE a\n" ), error );
}
