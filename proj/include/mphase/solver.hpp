/*!
  \file solver.hpp
  \brief LP and ILP solving of clocking instances, LP-file export, and rounding of relaxed depths
*/

#pragma once

#include "error.hpp"
#include "formulation.hpp"
#include "lp_model.hpp"
#include "simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

namespace mphase
{

enum class solve_status
{
  optimal,
  incumbent, // limit reached; best feasible solution so far
  infeasible,
  no_solution // limit reached without any feasible solution
};

inline const char* to_string( solve_status s )
{
  switch ( s )
  {
  case solve_status::optimal: return "optimal";
  case solve_status::incumbent: return "incumbent";
  case solve_status::infeasible: return "infeasible";
  case solve_status::no_solution: return "no solution";
  }
  return "?";
}

struct solve_stats
{
  long iterations = 0;
  long nodes = 0; // branch-and-bound child nodes; 0 when the root relaxation is integral
  double seconds = 0.0;
};

struct solution
{
  solve_status status = solve_status::no_solution;
  std::vector<double> values;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double bound = -infinity; // proven lower bound on the optimum
  solve_stats stats;

  bool has_values() const { return status == solve_status::optimal || status == solve_status::incumbent; }
};

struct ilp_options
{
  double time_limit = 3000.0; // seconds
  long node_limit = -1;
  int cut_rounds = 20; // rounds of Gomory cuts at the root; 0 disables
  std::optional<std::vector<double>> warm_start;
  /*! \brief Optional feasible point to seed the root relaxation (not an incumbent). */
  const std::vector<double>* lp_start = nullptr;
};

namespace detail
{

inline double seconds_since( std::chrono::steady_clock::time_point t0 )
{
  return std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
}

inline std::vector<double> lower_bounds( const lp_model& m )
{
  std::vector<double> v( m.num_vars() );
  for ( std::size_t j = 0; j < v.size(); ++j )
    v[j] = m.vars[j].lower;
  return v;
}

inline std::vector<double> upper_bounds( const lp_model& m )
{
  std::vector<double> v( m.num_vars() );
  for ( std::size_t j = 0; j < v.size(); ++j )
    v[j] = m.vars[j].upper;
  return v;
}

/* objective takes integral values on integral points */
inline bool integral_objective( const lp_model& m )
{
  for ( auto const& v : m.vars )
  {
    if ( v.cost != 0.0 && ( !v.integer || v.cost != std::floor( v.cost ) ) )
      return false;
  }
  return true;
}

/* integrality of every simplex column: integer structurals, and logicals of rows that are integral on integral points */
inline std::vector<char> integral_columns( const lp_model& m )
{
  auto whole = []( double v ) { return !std::isfinite( v ) || v == std::floor( v ); };
  std::vector<char> ic( m.num_vars() + m.num_rows(), 0 );
  for ( std::size_t j = 0; j < m.num_vars(); ++j )
    ic[j] = m.vars[j].integer && whole( m.vars[j].lower ) && whole( m.vars[j].upper );
  for ( std::size_t r = 0; r < m.num_rows(); ++r )
    ic[m.num_vars() + r] = std::all_of( m.rows[r].terms.begin(), m.rows[r].terms.end(),
                                        [&]( const lp_term& t ) { return ic[t.var] && t.coef == std::floor( t.coef ); } );
  return ic;
}

/*! \brief Gomory mixed-integer cuts from the tableau rows of fractional integer basics.

  Returned rows are `>=` constraints over the structurals, valid for every
  integral point within the model bounds.
*/
inline std::vector<lp_row> gomory_cuts( const bounded_simplex& spx, const lp_model& m, std::size_t max_cuts )
{
  const auto ic = integral_columns( m );
  const int n = spx.num_structurals();
  auto frac = []( double v ) { return v - std::floor( v ); };

  std::vector<std::pair<double, int>> cand;
  for ( int p = 0; p < spx.num_rows(); ++p )
  {
    int j = spx.basic_column( p );
    if ( !ic[j] )
      continue;
    double f = frac( spx.value( j ) );
    if ( f > 0.01 && f < 0.99 )
      cand.emplace_back( -std::min( f, 1.0 - f ), p );
  }
  std::sort( cand.begin(), cand.end() );

  std::vector<lp_row> cuts;
  std::vector<double> coef( n, 0.0 );
  for ( auto [score, p] : cand )
  {
    if ( cuts.size() >= max_cuts )
      break;
    const double f0 = frac( spx.value( spx.basic_column( p ) ) );
    std::fill( coef.begin(), coef.end(), 0.0 );
    double rhs = 1.0;
    bool ok = true;
    // x_B + sum a_j x_j = 0; with x_j = bound +/- t_j this reads x_B + sum a~_j t_j = x_B*, cut: sum g_j t_j >= 1
    for ( auto [j, a] : spx.tableau_row( p ) )
    {
      bool up = spx.nonbasic_at_upper( j );
      if ( !up && !spx.nonbasic_at_lower( j ) )
      {
        ok = false;
        break;
      }
      double at = up ? -a : a;
      double g;
      if ( ic[j] )
      {
        double fj = frac( at );
        g = fj <= f0 ? fj / f0 : ( 1.0 - fj ) / ( 1.0 - f0 );
      }
      else
        g = at >= 0.0 ? at / f0 : -at / ( 1.0 - f0 );
      if ( g < 1e-12 )
        continue;
      double sign = up ? -1.0 : 1.0;
      rhs += g * sign * ( up ? spx.upper( j ) : spx.lower( j ) );
      if ( j < n )
        coef[j] += g * sign;
      else
        for ( auto const& t : m.rows[j - n].terms )
          coef[t.var] += g * sign * t.coef;
    }
    if ( !ok )
      continue;

    lp_row cut{ "cut" + std::to_string( m.num_rows() + cuts.size() ), {}, row_sense::ge, rhs };
    double big = 0.0, small = infinity, act = 0.0;
    for ( int k = 0; k < n && ok; ++k )
    {
      double c = coef[k];
      if ( c == 0.0 )
        continue;
      if ( std::fabs( c ) < 1e-9 )
      {
        // drop the term, weakening the cut by its largest possible contribution
        double b = c > 0.0 ? m.vars[k].upper : m.vars[k].lower;
        if ( !std::isfinite( b ) )
          ok = false;
        cut.rhs -= c * b;
        continue;
      }
      cut.terms.push_back( { k, c } );
      big = std::max( big, std::fabs( c ) );
      small = std::min( small, std::fabs( c ) );
      act += c * spx.value( k );
    }
    if ( !ok || cut.terms.empty() || big > 1e6 * small )
      continue;
    for ( auto& t : cut.terms )
      t.coef /= big;
    cut.rhs /= big;
    act /= big;
    cut.rhs -= 1e-9 * std::max( 1.0, std::fabs( cut.rhs ) );
    if ( cut.rhs - act < 1e-6 )
      continue;
    cuts.push_back( std::move( cut ) );
  }
  return cuts;
}

} // namespace detail

/*! \brief Solves the linear relaxation of `model` (integrality ignored). */
inline solution solve_lp( const lp_model& model, const std::vector<double>* start = nullptr, std::optional<double> time_limit = std::nullopt )
{
  auto t0 = std::chrono::steady_clock::now();
  bounded_simplex spx( model );
  simplex_options opts;
  if ( time_limit )
    opts.deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>( std::chrono::duration<double>( *time_limit ) );
  auto lo = detail::lower_bounds( model ), hi = detail::upper_bounds( model );
  auto r = spx.solve( lo, hi, start, nullptr, opts );

  solution sol;
  sol.stats.iterations = r.iterations;
  sol.stats.seconds = detail::seconds_since( t0 );
  switch ( r.status )
  {
  case lp_status::optimal:
    sol.status = solve_status::optimal;
    sol.values = std::move( r.x );
    sol.objective = r.objective;
    sol.bound = r.objective;
    break;
  case lp_status::infeasible:
    sol.status = solve_status::infeasible;
    break;
  case lp_status::time_limit:
  case lp_status::iteration_limit:
    sol.status = solve_status::no_solution;
    break;
  default:
    throw error( error_category::solver, std::string( "LP solve failed: " ) + to_string( r.status ) );
  }
  return sol;
}

/*! \brief LP relaxation of a clocking instance, seeded with its longest-path point.

  The relaxation of a well-formed instance is always feasible, so infeasibility is reported as an error.
*/
inline solution solve_lp( const problem_instance& inst, std::optional<double> time_limit = std::nullopt )
{
  auto sol = solve_lp( inst.model, inst.start.empty() ? nullptr : &inst.start, time_limit );
  if ( sol.status == solve_status::infeasible )
    throw error( error_category::solver, "LP relaxation reported infeasible; the clocking instance is malformed" );
  return sol;
}

/*! \brief Branch and bound over the integer variables.

  Branches on the most fractional variable, objective-carrying variables first.
  Search dives depth-first into the child on the nearer integer side and
  backtracks to the open node with the best bound. Child LPs are warm-started
  from the parent basis. A feasible integral `warm_start` becomes the initial
  incumbent.
*/
inline solution solve_ilp( const lp_model& model, const ilp_options& opts = {} )
{
  auto t0 = std::chrono::steady_clock::now();
  auto deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>( std::chrono::duration<double>( opts.time_limit ) );
  const double int_tol = 1e-6;
  const bool integral_obj = detail::integral_objective( model );

  solution sol;
  double incumbent = infinity;
  if ( opts.warm_start )
  {
    if ( !model.is_feasible_integral( *opts.warm_start ) )
      throw error( error_category::solver, "warm start is not an integral feasible point" );
    sol.values = *opts.warm_start;
    incumbent = model.objective( sol.values );
  }

  auto prunable = [&]( double bound ) {
    if ( integral_obj )
      return bound > incumbent - 1.0 + int_tol;
    return bound >= incumbent - 1e-9;
  };

  struct bound_change
  {
    int var;
    double lower, upper;
  };
  struct node
  {
    std::vector<bound_change> changes;
    std::shared_ptr<const simplex_basis> basis;
    double bound;
    long seq;
  };
  auto worse = []( const node& a, const node& b ) { return a.bound > b.bound || ( a.bound == b.bound && a.seq > b.seq ); };
  std::priority_queue<node, std::vector<node>, decltype( worse )> open( worse );

  const auto root_lo = detail::lower_bounds( model ), root_hi = detail::upper_bounds( model );
  std::vector<double> lo, hi;
  simplex_options sopts;
  sopts.deadline = deadline;

  // cut-and-branch: tighten the root relaxation, then search over the tightened model
  lp_model work = model;
  std::shared_ptr<const simplex_basis> root_basis;
  {
    simplex_basis basis;
    double last = -infinity;
    std::size_t kept_rows = work.num_rows();
    for ( int round = 0; round < opts.cut_rounds; ++round )
    {
      bounded_simplex cspx( work );
      auto r = cspx.solve( root_lo, root_hi, round == 0 ? opts.lp_start : nullptr, basis.empty() ? nullptr : &basis, sopts );
      sol.stats.iterations += r.iterations;
      if ( r.status != lp_status::optimal )
      {
        // drop the round that upset the relaxation
        work.rows.resize( kept_rows );
        break;
      }
      kept_rows = work.num_rows();
      basis = std::move( r.basis );
      if ( prunable( r.objective ) || r.objective < last + 1e-3 )
        break;
      last = r.objective;
      auto cuts = detail::gomory_cuts( cspx, work, 100 );
      if ( cuts.empty() )
        break;
      // new logicals enter the basis at their current activity (status 0 is basic)
      const int n = static_cast<int>( work.num_vars() );
      for ( auto& c : cuts )
      {
        basis.head.push_back( n + static_cast<int>( work.num_rows() ) );
        basis.status.push_back( 0 );
        basis.x.push_back( work.activity( c, r.x ) );
        work.add_row( std::move( c ) );
      }
    }
    if ( !basis.empty() && basis.head.size() == work.num_rows() )
      root_basis = std::make_shared<const simplex_basis>( std::move( basis ) );
  }

  bounded_simplex spx( work );
  long seq = 0;
  bool limit_hit = false;
  double root_bound = -infinity;
  std::optional<node> current = node{ {}, root_basis, -infinity, seq++ };

  while ( true )
  {
    if ( !current )
    {
      while ( !open.empty() && prunable( open.top().bound ) )
        open.pop();
      if ( open.empty() )
        break;
      current = open.top();
      open.pop();
    }
    if ( std::chrono::steady_clock::now() > deadline || ( opts.node_limit >= 0 && sol.stats.nodes >= opts.node_limit ) )
    {
      limit_hit = true;
      open.push( *current );
      break;
    }

    lo = root_lo;
    hi = root_hi;
    for ( auto const& c : current->changes )
    {
      lo[c.var] = c.lower;
      hi[c.var] = c.upper;
    }
    bool is_root = current->changes.empty();
    auto r = spx.solve( lo, hi, is_root ? opts.lp_start : nullptr, current->basis.get(), sopts );
    sol.stats.iterations += r.iterations;
    if ( r.status == lp_status::numerical_failure || r.status == lp_status::iteration_limit )
    {
      // retry cold, then without the cuts
      r = spx.solve( lo, hi, opts.lp_start, nullptr, sopts );
      sol.stats.iterations += r.iterations;
      if ( r.status == lp_status::numerical_failure || r.status == lp_status::iteration_limit )
      {
        bounded_simplex plain( model );
        r = plain.solve( lo, hi, opts.lp_start, nullptr, sopts );
        sol.stats.iterations += r.iterations;
        r.basis = {};
      }
    }
    if ( r.status == lp_status::time_limit || r.status == lp_status::iteration_limit )
    {
      limit_hit = true;
      open.push( *current );
      break;
    }
    if ( r.status == lp_status::infeasible )
    {
      current.reset();
      continue;
    }
    if ( r.status != lp_status::optimal )
      throw error( error_category::solver, std::string( "branch-and-bound relaxation failed: " ) + to_string( r.status ) );
    if ( is_root )
      root_bound = r.objective;
    if ( prunable( r.objective ) )
    {
      current.reset();
      continue;
    }

    int branch = -1;
    double best_score = -1.0;
    bool best_costly = false;
    for ( std::size_t j = 0; j < model.num_vars(); ++j )
    {
      if ( !model.vars[j].integer )
        continue;
      double f = r.x[j] - std::floor( r.x[j] );
      if ( f <= int_tol || f >= 1.0 - int_tol )
        continue;
      bool costly = model.vars[j].cost != 0.0;
      double score = 0.5 - std::fabs( f - 0.5 );
      if ( ( costly && !best_costly ) || ( costly == best_costly && score > best_score + 1e-12 ) )
      {
        branch = static_cast<int>( j );
        best_score = score;
        best_costly = costly;
      }
    }

    if ( branch < 0 )
    {
      std::vector<double> x = r.x;
      for ( std::size_t j = 0; j < x.size(); ++j )
      {
        if ( model.vars[j].integer )
          x[j] = std::round( x[j] );
      }
      if ( !model.is_feasible_integral( x ) && !model.is_feasible( x ) )
        x = r.x;
      double obj = model.objective( x );
      if ( obj < incumbent )
      {
        incumbent = obj;
        sol.values = std::move( x );
      }
      current.reset();
      continue;
    }

    auto basis = std::make_shared<const simplex_basis>( std::move( r.basis ) );
    double v = r.x[branch];
    node down{ current->changes, basis, r.objective, seq++ };
    down.changes.push_back( { branch, lo[branch], std::floor( v ) } );
    node up{ std::move( current->changes ), basis, r.objective, seq++ };
    up.changes.push_back( { branch, std::ceil( v ), hi[branch] } );
    sol.stats.nodes += 2;
    if ( v - std::floor( v ) < 0.5 )
    {
      open.push( std::move( up ) );
      current = std::move( down );
    }
    else
    {
      open.push( std::move( down ) );
      current = std::move( up );
    }
  }

  sol.stats.seconds = detail::seconds_since( t0 );
  double open_bound = infinity;
  if ( limit_hit )
  {
    while ( !open.empty() )
    {
      open_bound = std::min( open_bound, open.top().bound );
      open.pop();
    }
    if ( !std::isfinite( open_bound ) ) // the limit hit before the root relaxation finished
      open_bound = root_bound;
  }
  if ( !sol.values.empty() )
  {
    sol.objective = incumbent;
    sol.status = limit_hit ? solve_status::incumbent : solve_status::optimal;
    sol.bound = limit_hit ? std::min( open_bound, incumbent ) : incumbent;
  }
  else
  {
    sol.status = limit_hit ? solve_status::no_solution : solve_status::infeasible;
    sol.bound = limit_hit ? open_bound : infinity;
  }
  return sol;
}

/*! \brief ILP of a clocking instance; the root relaxation is seeded with the instance's longest-path point. */
inline solution solve_ilp( const problem_instance& inst, double time_limit = 3000.0, std::optional<std::vector<double>> warm_start = std::nullopt,
                           long node_limit = -1 )
{
  ilp_options opts;
  opts.time_limit = time_limit;
  opts.warm_start = std::move( warm_start );
  opts.node_limit = node_limit;
  opts.lp_start = inst.start.empty() ? nullptr : &inst.start;
  return solve_ilp( inst.model, opts );
}

/*! \brief Rounds every phase depth of a relaxed solution up to the next integer.

  Edge and driver counts are dropped; they are recomputed from the depths.
  Throws when a depth-only constraint no longer holds, which would indicate a
  malformed instance.
*/
inline std::vector<long> round_solution( const problem_instance& inst, const solution& lp )
{
  if ( !lp.has_values() )
    throw error( error_category::solver, "cannot round: relaxation has no solution" );
  auto up = []( double v ) { return static_cast<long>( std::ceil( v - 1e-6 ) ); };
  std::vector<long> depths( inst.depth_var.size() );
  for ( std::size_t v = 0; v < depths.size(); ++v )
    depths[v] = up( lp.values[inst.depth_var[v]] );

  std::vector<long> value( inst.model.num_vars(), 0 );
  std::vector<bool> is_depth( inst.model.num_vars(), false );
  for ( std::size_t v = 0; v < depths.size(); ++v )
  {
    value[inst.depth_var[v]] = depths[v];
    is_depth[inst.depth_var[v]] = true;
  }
  value[inst.outputs_var] = up( lp.values[inst.outputs_var] );
  is_depth[inst.outputs_var] = true;

  for ( auto const& d : depths )
  {
    if ( d < 1 )
      throw error( error_category::solver, "rounded depth below 1" );
  }
  for ( auto const& row : inst.model.rows )
  {
    if ( !std::all_of( row.terms.begin(), row.terms.end(), [&]( const lp_term& t ) { return is_depth[t.var]; } ) )
      continue;
    long a = 0;
    for ( auto const& t : row.terms )
      a += static_cast<long>( t.coef ) * value[t.var];
    auto rhs = static_cast<long>( row.rhs );
    bool ok = row.sense == row_sense::ge ? a >= rhs : row.sense == row_sense::le ? a <= rhs : a == rhs;
    if ( !ok )
      throw error( error_category::solver, "constraint '" + row.name + "' violated after rounding" );
  }
  return depths;
}

namespace detail
{

inline std::string lp_number( double v )
{
  if ( v == std::floor( v ) && std::fabs( v ) < 1e15 )
    return std::to_string( static_cast<long long>( v ) );
  char buf[32];
  std::snprintf( buf, sizeof buf, "%.17g", v );
  return buf;
}

/* writes `name: sum terms` wrapping long lines */
inline void lp_expression( std::ostream& os, const std::string& label, const std::vector<lp_term>& terms, const lp_model& m )
{
  std::string line = " " + label + ":";
  bool first = true;
  for ( auto const& t : terms )
  {
    std::string term;
    double c = t.coef;
    if ( c < 0 )
      term = " - ";
    else if ( !first )
      term = " + ";
    else
      term = " ";
    double a = std::fabs( c );
    if ( a != 1.0 )
      term += lp_number( a ) + " ";
    term += m.vars[t.var].name;
    if ( line.size() + term.size() > 200 )
    {
      os << line << "\n";
      line = "   ";
    }
    line += term;
    first = false;
  }
  if ( terms.empty() )
    line += " 0 " + m.vars.front().name;
  os << line;
}

} // namespace detail

/*! \brief CPLEX LP text for a model. Integer markers (`General`) are written only when `integral` is set. */
inline std::string export_lp_format( const lp_model& m, bool integral = true, const std::string& title = {} )
{
  std::ostringstream os;
  os << "\\ " << ( title.empty() ? "mphase model" : title ) << "\n";
  os << "Minimize\n";
  std::vector<lp_term> obj;
  for ( std::size_t j = 0; j < m.num_vars(); ++j )
  {
    if ( m.vars[j].cost != 0.0 )
      obj.push_back( { static_cast<int>( j ), m.vars[j].cost } );
  }
  detail::lp_expression( os, "obj", obj, m );
  os << "\nSubject To\n";
  for ( auto const& r : m.rows )
  {
    detail::lp_expression( os, r.name, r.terms, m );
    os << ( r.sense == row_sense::le ? " <= " : r.sense == row_sense::ge ? " >= " : " = " ) << detail::lp_number( r.rhs ) << "\n";
  }
  os << "Bounds\n";
  for ( auto const& v : m.vars )
  {
    bool lo_default = v.lower == 0.0, hi_inf = !std::isfinite( v.upper );
    if ( lo_default && hi_inf )
      continue;
    if ( !std::isfinite( v.lower ) && hi_inf )
      os << " " << v.name << " free\n";
    else if ( hi_inf )
      os << " " << v.name << " >= " << detail::lp_number( v.lower ) << "\n";
    else if ( !std::isfinite( v.lower ) )
      os << " -inf <= " << v.name << " <= " << detail::lp_number( v.upper ) << "\n";
    else
      os << " " << detail::lp_number( v.lower ) << " <= " << v.name << " <= " << detail::lp_number( v.upper ) << "\n";
  }
  if ( integral )
  {
    std::string line;
    bool any = false;
    for ( auto const& v : m.vars )
    {
      if ( !v.integer )
        continue;
      if ( !any )
        os << "General\n";
      any = true;
      if ( line.size() + v.name.size() > 200 )
      {
        os << line << "\n";
        line.clear();
      }
      line += " " + v.name;
    }
    if ( !line.empty() )
      os << line << "\n";
  }
  os << "End\n";
  return os.str();
}

inline std::string export_lp_format( const problem_instance& inst, bool integral = true )
{
  std::string title = "clocking instance: N=" + std::to_string( inst.n_phases ) + " d_loop=" + std::to_string( inst.d_loop ) +
                      ( inst.hold_safe ? " hold-safe" : "" ) + ( inst.fanout_aware ? " fanout-aware" : "" );
  return export_lp_format( inst.model, integral, title );
}

} // namespace mphase
