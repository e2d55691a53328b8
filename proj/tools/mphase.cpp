// mphase: multi-phase clocking assignment for SFQ netlists

#include <mphase/mphase.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mphase;

namespace
{

int exit_code( error_category c )
{
  switch ( c )
  {
  case error_category::parse: return 2;
  case error_category::structure: return 3;
  case error_category::parameter: return 4;
  case error_category::solver: return 5;
  case error_category::verification: return 6;
  case error_category::io: return 7;
  }
  return 1;
}

std::string read_file( const std::string& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw error( error_category::io, "cannot open " + path );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

netlist load( const std::string& path )
{
  auto text = read_file( path );
  try
  {
    return parse_bench( text, fs::path( path ).stem().string() );
  }
  catch ( const error& e )
  {
    throw error( e.category(), e.what(), e.location().empty() ? path : path + ":" + e.location() );
  }
}

// files are written only once the whole run has succeeded, so a failure never leaves half of them behind
class artifacts
{
public:
  void add( std::string path, std::string content ) { pending_.emplace_back( std::move( path ), std::move( content ) ); }

  void commit()
  {
    for ( auto const& [path, content] : pending_ )
    {
      std::ofstream out( path, std::ios::binary );
      if ( !out || !( out << content ) )
      {
        rollback();
        throw error( error_category::io, "cannot write " + path );
      }
      written_.push_back( path );
    }
    pending_.clear();
  }

  void rollback()
  {
    std::error_code ec;
    for ( auto const& p : written_ )
      fs::remove( p, ec );
    written_.clear();
    pending_.clear();
  }

private:
  std::vector<std::pair<std::string, std::string>> pending_;
  std::vector<std::string> written_;
};

void write_now( const std::string& path, const std::string& content )
{
  std::ofstream out( path, std::ios::binary );
  if ( !out || !( out << content ) )
    throw error( error_category::io, "cannot write " + path );
}

struct common_flags
{
  std::string solver = "both";
  double time_limit = 3000.0;
  long node_limit = -1;
  bool verify = false;
  long vectors = 1000;
  std::uint64_t seed = sim_config{}.seed;
  std::string report = "text";
  std::string report_file;
  bool no_timing = false;
};

void add_common( CLI::App& app, common_flags& f )
{
  app.add_option( "--solver", f.solver, "lp, ilp or both" )->check( CLI::IsMember( { "lp", "ilp", "both" } ) );
  app.add_option( "--time-limit", f.time_limit, "ILP/LP time limit in seconds" )->check( CLI::PositiveNumber );
  app.add_option( "--node-limit", f.node_limit, "branch-and-bound node limit (-1: none)" );
  app.add_flag( "--verify", f.verify, "simulate against the original netlist" );
  app.add_option( "--vectors", f.vectors, "random vectors per thread for --verify" )->check( CLI::PositiveNumber );
  app.add_option( "--seed", f.seed, "seed of the vector generator" );
  app.add_option( "--report", f.report, "text or json" )->check( CLI::IsMember( { "text", "json" } ) );
  app.add_option( "--report-file", f.report_file, "write the report here instead of stdout" );
  app.add_flag( "--no-timing", f.no_timing, "leave wall times out of the report" );
}

run_options to_options( const common_flags& f )
{
  run_options o;
  o.solver = f.solver == "lp" ? solver_choice::lp : f.solver == "ilp" ? solver_choice::ilp : solver_choice::both;
  o.time_limit = f.time_limit;
  o.node_limit = f.node_limit;
  o.verify = f.verify;
  o.sim.vectors_per_thread = f.vectors;
  o.sim.seed = f.seed;
  return o;
}

void emit_report( const common_flags& f, const std::string& text )
{
  if ( f.report_file.empty() )
    std::cout << text;
  else
    write_now( f.report_file, text );
}

std::vector<int> parse_int_list( const std::string& s )
{
  std::vector<int> v;
  std::stringstream ss( s );
  std::string item;
  while ( std::getline( ss, item, ',' ) )
  {
    try
    {
      std::size_t used = 0;
      v.push_back( std::stoi( item, &used ) );
      if ( used != item.size() )
        throw std::invalid_argument( item );
    }
    catch ( const std::exception& )
    {
      throw error( error_category::parameter, "bad phase list entry '" + item + "'" );
    }
  }
  return v;
}

std::vector<variant> parse_modes( const std::string& s )
{
  std::vector<variant> v;
  std::stringstream ss( s );
  std::string item;
  while ( std::getline( ss, item, ',' ) )
  {
    auto m = variant_from_string( item );
    if ( !m )
      throw error( error_category::parameter, "unknown mode '" + item + "'" );
    v.push_back( *m );
  }
  return v;
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "Multi-phase clocking assignment and path-balancing DFF insertion for SFQ netlists" };
  app.require_subcommand( 0, 1 );

  common_flags cf;
  std::string input, mode = "baseline", emit, export_lp, dump_dot, dump_vcd;
  int phases = 2;
  std::optional<int> dloop;
  auto* in_opt = app.add_option( "--input", input, ".bench netlist" );
  auto* ph_opt = app.add_option( "--phases", phases, "number of clock phases N" );
  app.add_option( "--dloop", dloop, "phase depth of register loops (multiple of N; default: smallest feasible)" );
  app.add_option( "--mode", mode, "fpb, baseline, fanout or holdsafe" )->check( CLI::IsMember( { "fpb", "baseline", "fanout", "holdsafe" } ) );
  app.add_option( "--emit", emit, "write the clocked netlist (.bench with phase annotations)" );
  app.add_option( "--export-lp", export_lp, "write the optimization model in LP format" );
  app.add_option( "--dump-dot", dump_dot, "write the circuit graph with depths in DOT format" );
  app.add_option( "--dump-vcd", dump_vcd, "write the multi-phase simulation waveform (needs --verify)" );
  add_common( app, cf );

  auto* batch = app.add_subcommand( "batch", "compare variants over a directory of .bench files" );
  common_flags bf;
  std::string dir, phase_list = "2,3,4", mode_list = "baseline,fanout,holdsafe";
  batch->add_option( "--dir", dir, "benchmark directory" )->required();
  batch->add_option( "--phases", phase_list, "comma-separated phase counts" );
  batch->add_option( "--modes", mode_list, "comma-separated variants" );
  add_common( *batch, bf );

  CLI11_PARSE( app, argc, argv );

  if ( batch->parsed() )
  {
    try
    {
      auto ns = parse_int_list( phase_list );
      auto modes = parse_modes( mode_list );
      if ( !fs::is_directory( dir ) )
        throw error( error_category::io, "not a directory: " + dir );
      std::vector<fs::path> files;
      for ( auto const& e : fs::directory_iterator( dir ) )
        if ( e.is_regular_file() && e.path().extension() == ".bench" )
          files.push_back( e.path() );
      std::sort( files.begin(), files.end() );
      if ( files.empty() )
        std::cerr << "mphase: warning: no .bench files in " << dir << "\n";

      std::vector<run_report> rows;
      bool failed = false;
      for ( auto const& file : files )
      {
        for ( auto m : modes )
        {
          for ( int n : m == variant::fpb ? std::vector<int>{ 1 } : ns )
          {
            auto opt = to_options( bf );
            opt.mode = m;
            opt.n_phases = n;
            try
            {
              auto res = run_pipeline( load( file.string() ), opt );
              if ( res.verification && !res.verification->pass )
                failed = true;
              rows.push_back( std::move( res.report ) );
            }
            catch ( const error& e )
            {
              run_report r;
              r.benchmark = file.stem().string();
              r.mode = m;
              r.n_phases = n;
              r.error = e.describe();
              rows.push_back( std::move( r ) );
              failed = true;
            }
          }
        }
      }
      emit_report( bf, bf.report == "json" ? format_batch_json( rows, !bf.no_timing ) : format_batch_text( rows, !bf.no_timing ) );
      return failed ? 1 : 0;
    }
    catch ( const error& e )
    {
      std::cerr << "mphase: " << e.describe() << "\n";
      return exit_code( e.category() );
    }
  }

  if ( in_opt->count() == 0 )
  {
    std::cerr << "mphase: --input is required\n" << app.help();
    return 4;
  }

  artifacts out;
  try
  {
    auto ntk = load( input );
    auto opt = to_options( cf );
    opt.mode = *variant_from_string( mode );
    opt.n_phases = opt.mode == variant::fpb && ph_opt->count() == 0 ? 1 : phases;
    opt.d_loop = dloop;
    std::ostringstream vcd;
    if ( !dump_vcd.empty() )
    {
      if ( !cf.verify )
        throw error( error_category::parameter, "--dump-vcd needs --verify" );
      opt.sim.vcd = &vcd;
    }

    auto res = run_pipeline( ntk, opt );
    if ( !dump_dot.empty() )
      write_now( dump_dot, to_dot( res.dag, &res.depths ) );
    if ( !dump_vcd.empty() )
      write_now( dump_vcd, vcd.str() );

    auto const& rep = res.report;
    emit_report( cf, cf.report == "json" ? format_json( rep, !cf.no_timing ) : format_text( rep, !cf.no_timing ) );
    if ( res.verification && !res.verification->pass )
      throw error( error_category::verification, res.verification->summary() );

    if ( !export_lp.empty() )
      out.add( export_lp, export_lp_format( res.instance ) );
    if ( !emit.empty() )
      out.add( emit, emit_bench( res.annotated ) );
    out.commit();
    return 0;
  }
  catch ( const error& e )
  {
    out.rollback();
    std::cerr << "mphase: " << e.describe() << "\n";
    return exit_code( e.category() );
  }
  catch ( const std::exception& e )
  {
    out.rollback();
    std::cerr << "mphase: internal error: " << e.what() << "\n";
    return 1;
  }
}
