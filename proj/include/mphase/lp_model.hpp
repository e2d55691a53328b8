/*!
  \file lp_model.hpp
  \brief Sparse (mixed-integer) linear program in row form: minimize c'x subject to row bounds and variable bounds
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace mphase
{

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/*! \brief Role of a variable in a clocking instance; `generic` for hand-built models. */
enum class var_kind : std::uint8_t
{
  generic,
  depth,
  outputs_depth,
  edge_cost,
  driver_cost
};

struct lp_variable
{
  std::string name;
  double lower = 0.0;
  double upper = infinity;
  double cost = 0.0;
  bool integer = false;
  var_kind kind = var_kind::generic;
  int ref = -1; // node or edge index for clocking instances
};

enum class row_sense : std::uint8_t
{
  le,
  ge,
  eq
};

struct lp_term
{
  int var;
  double coef;
};

struct lp_row
{
  std::string name;
  std::vector<lp_term> terms;
  row_sense sense;
  double rhs;
};

struct lp_model
{
  std::vector<lp_variable> vars;
  std::vector<lp_row> rows;

  int add_variable( lp_variable v )
  {
    vars.push_back( std::move( v ) );
    return static_cast<int>( vars.size() ) - 1;
  }

  int add_row( lp_row r )
  {
    rows.push_back( std::move( r ) );
    return static_cast<int>( rows.size() ) - 1;
  }

  std::size_t num_vars() const { return vars.size(); }
  std::size_t num_rows() const { return rows.size(); }

  double objective( const std::vector<double>& x ) const
  {
    double obj = 0.0;
    for ( std::size_t j = 0; j < vars.size(); ++j )
      obj += vars[j].cost * x[j];
    return obj;
  }

  double activity( const lp_row& r, const std::vector<double>& x ) const
  {
    double a = 0.0;
    for ( auto const& t : r.terms )
      a += t.coef * x[t.var];
    return a;
  }

  /*! \brief Largest absolute bound or row violation of `x`. */
  double max_violation( const std::vector<double>& x ) const
  {
    double worst = 0.0;
    for ( std::size_t j = 0; j < vars.size(); ++j )
    {
      worst = std::max( worst, vars[j].lower - x[j] );
      worst = std::max( worst, x[j] - vars[j].upper );
    }
    for ( auto const& r : rows )
    {
      double a = activity( r, x );
      if ( r.sense != row_sense::le )
        worst = std::max( worst, r.rhs - a );
      if ( r.sense != row_sense::ge )
        worst = std::max( worst, a - r.rhs );
    }
    return worst;
  }

  bool is_feasible( const std::vector<double>& x, double tol = 1e-6 ) const
  {
    return x.size() == vars.size() && max_violation( x ) <= tol;
  }

  /*! \brief Exact check for integral points of integer-coefficient models.

    Falls back to the tolerance check when a coefficient, bound or right-hand
    side is not integral.
  */
  bool is_feasible_integral( const std::vector<double>& x ) const
  {
    if ( x.size() != vars.size() )
      return false;
    auto integral = []( double v ) { return std::isfinite( v ) && v == std::floor( v ) && std::fabs( v ) < 9e15; };
    std::vector<long long> xi( x.size() );
    for ( std::size_t j = 0; j < x.size(); ++j )
    {
      if ( !integral( x[j] ) )
        return false;
      xi[j] = static_cast<long long>( x[j] );
      if ( std::isfinite( vars[j].lower ) && x[j] < vars[j].lower )
        return false;
      if ( std::isfinite( vars[j].upper ) && x[j] > vars[j].upper )
        return false;
    }
    for ( auto const& r : rows )
    {
      if ( !integral( r.rhs ) || !std::all_of( r.terms.begin(), r.terms.end(), [&]( const lp_term& t ) { return integral( t.coef ); } ) )
        return is_feasible( x );
      long long a = 0;
      for ( auto const& t : r.terms )
        a += static_cast<long long>( t.coef ) * xi[t.var];
      auto rhs = static_cast<long long>( r.rhs );
      if ( ( r.sense == row_sense::le && a > rhs ) || ( r.sense == row_sense::ge && a < rhs ) || ( r.sense == row_sense::eq && a != rhs ) )
        return false;
    }
    return true;
  }
};

} // namespace mphase
