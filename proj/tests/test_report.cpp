#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace mphase;
using namespace mphase::test;

namespace
{

run_options opts( int n, variant mode )
{
  run_options o;
  o.n_phases = n;
  o.mode = mode;
  o.time_limit = 300.0;
  return o;
}

} // namespace

TEST_CASE( "s27 fanout at N=4, both solvers, verified", "[report]" )
{
  auto o = opts( 4, variant::fanout );
  o.verify = true;
  auto res = run_pipeline( bundled( "s27" ), o );
  auto const& r = res.report;
  REQUIRE( r.lp_dffs );
  REQUIRE( r.ilp_dffs );
  CHECK( *r.lp_dffs >= *r.ilp_dffs );
  CHECK( r.ilp_status == "optimal" );
  CHECK( r.verdict.rfind( "pass", 0 ) == 0 );
  CHECK( r.d_loop % 4 == 0 );
  CHECK( r.threads == r.d_loop / 4 );
  CHECK( count_inserted( res.dag, recompute_edge_costs( res.depths, res.dag, 4, false ), true ) == static_cast<long>( res.annotated.inserted.size() ) );
}

TEST_CASE( "parameter errors", "[report]" )
{
  auto ntk = bundled( "s27" );
  auto category = [&]( run_options o ) {
    try
    {
      run_pipeline( ntk, o );
    }
    catch ( const error& e )
    {
      return e.category();
    }
    return error_category::io;
  };
  CHECK( category( opts( 1, variant::holdsafe ) ) == error_category::parameter );
  CHECK( category( opts( 2, variant::fpb ) ) == error_category::parameter );
  auto o = opts( 2, variant::baseline );
  o.d_loop = 5;
  CHECK( category( o ) == error_category::parameter );
}

TEST_CASE( "reports are byte-identical without timing", "[report]" )
{
  auto ntk = bundled( "mult4" );
  auto a = run_pipeline( ntk, opts( 3, variant::baseline ) ).report;
  auto b = run_pipeline( ntk, opts( 3, variant::baseline ) ).report;
  CHECK( format_json( a, false ) == format_json( b, false ) );
  CHECK( format_text( a, false ) == format_text( b, false ) );
  CHECK( format_json( a, false ).find( "seconds" ) == std::string::npos );
  CHECK( format_json( a, true ).find( "seconds" ) != std::string::npos );
}

TEST_CASE( "JSON schema", "[report]" )
{
  auto r = run_pipeline( bundled( "c17" ), opts( 2, variant::baseline ) ).report;
  auto j = nlohmann::json::parse( format_json( r, false ) );
  CHECK( j["schema"] == 1 );
  CHECK( j["benchmark"] == "c17" );
  CHECK( j["variant"] == "baseline" );
  CHECK( j["dffs"]["fpb"] == r.fpb_dffs );
  CHECK( j["dffs"]["ilp"] == *r.ilp_dffs );
  CHECK( j["verification"] == "not run" );
}

TEST_CASE( "LP-only and ILP-only runs", "[report]" )
{
  auto ntk = bundled( "c17" );
  auto o = opts( 2, variant::baseline );
  o.solver = solver_choice::lp;
  auto lp = run_pipeline( ntk, o ).report;
  CHECK( lp.lp_dffs );
  CHECK( !lp.ilp_dffs );
  CHECK( lp.emitted == "lp" );
  CHECK( ilp_cell( lp ) == "-" );
  o.solver = solver_choice::ilp;
  auto ilp = run_pipeline( ntk, o ).report;
  CHECK( !ilp.lp_dffs );
  CHECK( ilp.ilp_dffs );
  CHECK( ilp.emitted == "ilp" );
}

TEST_CASE( "incumbents are starred", "[report]" )
{
  run_report r;
  r.ilp_dffs = 12;
  r.ilp_status = "incumbent";
  CHECK( ilp_cell( r ) == "12*" );
  r.ilp_status = "optimal";
  CHECK( ilp_cell( r ) == "12" );
  r.ilp_dffs.reset();
  r.ilp_status = "none";
  CHECK( ilp_cell( r ) == "none" );
}

TEST_CASE( "batch totals", "[report]" )
{
  std::vector<run_report> rows;
  for ( auto const& name : { "c17", "dec4" } )
    rows.push_back( run_pipeline( bundled( name ), opts( 2, variant::baseline ) ).report );
  run_report bad;
  bad.benchmark = "broken";
  bad.error = "parse error at line 3: nope";
  rows.push_back( bad );

  auto t = totals( rows );
  CHECK( t.fpb == rows[0].fpb_dffs + rows[1].fpb_dffs );
  CHECK( t.ilp == *rows[0].ilp_dffs + *rows[1].ilp_dffs );

  auto text = format_batch_text( rows, false );
  auto last = text.substr( text.rfind( '\n', text.size() - 2 ) + 1 );
  CHECK( last.rfind( "Total", 0 ) == 0 );
  CHECK( last.find( std::to_string( t.fpb ) ) != std::string::npos );
  CHECK( text.find( "error: parse error" ) != std::string::npos );

  auto j = nlohmann::json::parse( format_batch_json( rows, false ) );
  CHECK( j["rows"].size() == 3 );
  CHECK( j["totals"]["fpb"] == t.fpb );
  CHECK( j["totals"]["ilp"] == t.ilp );
}

TEST_CASE( "savings", "[report]" )
{
  CHECK( run_report::savings( 100, 35L ) == Catch::Approx( 65.0 ) );
  CHECK( !run_report::savings( 0, 3L ) );
  CHECK( !run_report::savings( 10, std::nullopt ) );
}
