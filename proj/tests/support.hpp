#pragma once

#include <mphase/mphase.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mphase::test
{

inline std::string bench_dir() { return MPHASE_BENCH_DIR; }

inline netlist load_bench( const std::string& path )
{
  std::ifstream in( path );
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bench( ss.str(), std::filesystem::path( path ).stem().string() );
}

inline netlist bundled( const std::string& name ) { return load_bench( bench_dir() + "/" + name + ".bench" ); }

/* small suite, sorted; large/ is not included */
inline std::vector<std::string> bundled_names()
{
  std::vector<std::string> v;
  for ( auto const& e : std::filesystem::directory_iterator( bench_dir() ) )
    if ( e.path().extension() == ".bench" )
      v.push_back( e.path().stem().string() );
  std::sort( v.begin(), v.end() );
  return v;
}

inline const char* and1 = "INPUT(a)\nINPUT(b)\nOUTPUT(c)\nc = AND(a, b)\n";

/* all integer points of a bounded model, best objective; NaN when infeasible */
inline double brute_force( const lp_model& m )
{
  const auto n = m.num_vars();
  std::vector<long> lo( n ), hi( n ), x( n );
  for ( std::size_t j = 0; j < n; ++j )
  {
    lo[j] = static_cast<long>( std::ceil( m.vars[j].lower ) );
    hi[j] = static_cast<long>( std::floor( m.vars[j].upper ) );
    x[j] = lo[j];
  }
  double best = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> xd( n );
  while ( true )
  {
    for ( std::size_t j = 0; j < n; ++j )
      xd[j] = static_cast<double>( x[j] );
    if ( m.is_feasible( xd, 1e-9 ) )
    {
      double f = m.objective( xd );
      if ( std::isnan( best ) || f < best )
        best = f;
    }
    std::size_t j = 0;
    while ( j < n && x[j] == hi[j] )
      x[j] = lo[j], ++j;
    if ( j == n )
      break;
    ++x[j];
  }
  return best;
}

/* random bounded ILP with up to 6 integer variables */
inline lp_model random_ilp( std::mt19937_64& rng, int max_vars = 6, int max_bound = 8 )
{
  std::uniform_int_distribution<int> nv( 1, max_vars ), nr( 1, 5 ), coef( -4, 4 ), cost( -5, 5 ), bound( 0, max_bound );
  lp_model m;
  int n = nv( rng );
  for ( int j = 0; j < n; ++j )
  {
    int a = bound( rng ), b = bound( rng );
    m.add_variable( { "x" + std::to_string( j ), static_cast<double>( std::min( a, b ) ), static_cast<double>( std::max( a, b ) ),
                      static_cast<double>( cost( rng ) ), true } );
  }
  int rows = nr( rng );
  for ( int r = 0; r < rows; ++r )
  {
    lp_row row{ "r" + std::to_string( r ), {}, row_sense::le, 0.0 };
    for ( int j = 0; j < n; ++j )
      if ( int c = coef( rng ); c != 0 )
        row.terms.push_back( { j, static_cast<double>( c ) } );
    if ( row.terms.empty() )
      continue;
    int s = static_cast<int>( rng() % 3 );
    row.sense = s == 0 ? row_sense::le : s == 1 ? row_sense::ge : row_sense::eq;
    // rhs around the activity of a random grid point keeps most instances feasible
    double act = 0;
    for ( auto const& t : row.terms )
    {
      auto const& v = m.vars[t.var];
      act += t.coef * std::floor( ( v.lower + v.upper ) / 2 );
    }
    std::uniform_int_distribution<int> jitter( -3, 3 );
    row.rhs = row.sense == row_sense::eq ? act : act + jitter( rng );
    m.add_row( row );
  }
  return m;
}

/* random acyclic netlist with optional registers; every net reaches an output */
inline netlist random_netlist( std::mt19937_64& rng, int pis, int gates, int regs )
{
  static const gate_op binary[] = { gate_op::and_, gate_op::or_, gate_op::nand_, gate_op::nor_, gate_op::xor_, gate_op::xnor_ };
  netlist ntk;
  ntk.name = "rnd";
  std::vector<std::string> nets;
  for ( int i = 0; i < pis; ++i )
  {
    ntk.inputs.push_back( "i" + std::to_string( i ) );
    nets.push_back( ntk.inputs.back() );
  }
  for ( int r = 0; r < regs; ++r )
    nets.push_back( "q" + std::to_string( r ) );
  std::vector<int> uses( pis + regs + gates, 0 );
  for ( int g = 0; g < gates; ++g )
  {
    std::uniform_int_distribution<std::size_t> pick( 0, nets.size() - 1 );
    cell c;
    c.output = "g" + std::to_string( g );
    auto a = pick( rng ), b = pick( rng );
    if ( rng() % 5 == 0 )
    {
      c.op = rng() % 2 ? gate_op::not_ : gate_op::buff;
      c.fanins = { nets[a] };
      ++uses[a];
    }
    else
    {
      c.op = binary[rng() % 6];
      c.fanins = { nets[a], nets[b] };
      ++uses[a];
      ++uses[b];
    }
    ntk.cells.push_back( c );
    nets.push_back( c.output );
  }
  for ( int r = 0; r < regs; ++r )
  {
    std::uniform_int_distribution<std::size_t> pick( pis + regs, nets.size() - 1 );
    auto a = pick( rng );
    ntk.cells.push_back( { "q" + std::to_string( r ), gate_op::dff, { nets[a] } } );
    ++uses[a];
  }
  // unused nets become outputs
  for ( std::size_t k = pis; k < nets.size(); ++k )
    if ( uses[k] == 0 )
      ntk.outputs.push_back( nets[k] );
  if ( ntk.outputs.empty() )
    ntk.outputs.push_back( nets.back() );
  return ntk;
}

/* gaps along every wire of an annotated netlist, from its own labels */
inline std::vector<long> wire_gaps( const annotated_netlist& an )
{
  std::vector<long> g;
  for ( auto const& c : an.base.cells )
  {
    bool reg = c.op == gate_op::dff && !an.is_inserted( c.output );
    long d = an.depth_of.at( c.output ) + ( reg ? an.d_loop() : 0 );
    for ( auto const& f : c.fanins )
      g.push_back( d - an.depth_of.at( f ) );
  }
  for ( std::size_t k = 0; k < an.ports.size(); ++k )
    g.push_back( an.depth_of.at( po_id( an.ports[k] ) ) - an.depth_of.at( an.base.outputs[k] ) );
  return g;
}

} // namespace mphase::test
