/*!
  \file simplex.hpp
  \brief Bounded-variable revised primal simplex

  Solves min c'x over an `lp_model` with explicit variable bounds (which
  branch-and-bound overrides per node). Every row r gets a logical variable
  s_r = a_r x whose bounds encode the row sense, so the working system is
  A x - s = 0 with all bounds on the columns.

  - Basis factorization: sparse LU (Eigen), refactorized periodically, with
    product-form eta updates in between.
  - Pricing: Dantzig (largest reduced cost); falls back to Bland's smallest
    index rule after a run of degenerate pivots, which guarantees termination.
  - Ratio test: Harris two-pass with a feasibility tolerance.
  - Phase 1 minimizes the sum of bound infeasibilities of the basic variables.
  - Nonbasic variables may start strictly between their bounds (superbasic),
    which lets a known feasible point seed the search. Before returning, any
    remaining superbasic variable is pivoted to a bound so the result is a
    vertex.
*/

#pragma once

#include "lp_model.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mphase
{

enum class lp_status
{
  optimal,
  infeasible,
  unbounded,
  iteration_limit,
  time_limit,
  numerical_failure
};

inline const char* to_string( lp_status s )
{
  switch ( s )
  {
  case lp_status::optimal: return "optimal";
  case lp_status::infeasible: return "infeasible";
  case lp_status::unbounded: return "unbounded";
  case lp_status::iteration_limit: return "iteration limit";
  case lp_status::time_limit: return "time limit";
  case lp_status::numerical_failure: return "numerical failure";
  }
  return "?";
}

struct simplex_options
{
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double pivot_tol = 1e-9;
  int refactor_interval = 100;
  int degenerate_run = 50; // consecutive degenerate pivots before switching to Bland's rule
  long max_iterations = -1; // -1: scaled with the problem size
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/*! \brief Basis snapshot for warm starts (columns: structurals, then one logical per row). */
struct simplex_basis
{
  std::vector<int> head;
  std::vector<std::int8_t> status;
  std::vector<double> x;

  bool empty() const { return head.empty(); }
};

struct simplex_result
{
  lp_status status = lp_status::numerical_failure;
  std::vector<double> x; // structural values
  double objective = 0.0;
  long iterations = 0;
  simplex_basis basis;
};

class bounded_simplex
{
public:
  explicit bounded_simplex( const lp_model& model )
      : n_( static_cast<int>( model.num_vars() ) ), m_( static_cast<int>( model.num_rows() ) )
  {
    std::vector<std::vector<std::pair<int, double>>> by_col( n_ );
    for ( int r = 0; r < m_; ++r )
    {
      for ( auto const& t : model.rows[r].terms )
      {
        if ( t.coef != 0.0 )
          by_col[t.var].emplace_back( r, t.coef );
      }
    }
    col_start_.reserve( n_ + 1 );
    col_start_.push_back( 0 );
    for ( auto& col : by_col )
    {
      std::sort( col.begin(), col.end() );
      for ( auto [r, a] : col )
      {
        row_idx_.push_back( r );
        value_.push_back( a );
      }
      col_start_.push_back( static_cast<int>( row_idx_.size() ) );
    }
    cost_.assign( n_ + m_, 0.0 );
    for ( int j = 0; j < n_; ++j )
      cost_[j] = model.vars[j].cost;
    row_lb_.resize( m_ );
    row_ub_.resize( m_ );
    for ( int r = 0; r < m_; ++r )
    {
      auto const& row = model.rows[r];
      row_lb_[r] = row.sense == row_sense::le ? -infinity : row.rhs;
      row_ub_[r] = row.sense == row_sense::ge ? infinity : row.rhs;
    }
  }

  /*! \brief Solves with structural bounds `lower`/`upper`.

    \param start optional point for the structurals (clamped to the bounds); ignored with a warm basis
    \param warm  optional basis from a previous solve of the same model
  */
  simplex_result solve( std::span<const double> lower, std::span<const double> upper, const std::vector<double>* start = nullptr,
                        const simplex_basis* warm = nullptr, const simplex_options& opts = {} )
  {
    opts_ = opts;
    const int total = n_ + m_;
    lb_.assign( total, 0.0 );
    ub_.assign( total, 0.0 );
    for ( int j = 0; j < n_; ++j )
    {
      lb_[j] = lower[j];
      ub_[j] = upper[j];
    }
    for ( int r = 0; r < m_; ++r )
    {
      lb_[n_ + r] = row_lb_[r];
      ub_[n_ + r] = row_ub_[r];
    }

    simplex_result res;
    for ( int j = 0; j < n_; ++j )
    {
      if ( lb_[j] > ub_[j] + opts_.feasibility_tol )
      {
        res.status = lp_status::infeasible;
        return res;
      }
    }

    bool warmed = warm && !warm->empty() && static_cast<int>( warm->head.size() ) == m_ && static_cast<int>( warm->status.size() ) == total;
    if ( warmed )
    {
      head_ = warm->head;
      status_ = warm->status;
      x_ = warm->x;
      for ( int j = 0; j < total; ++j )
      {
        if ( status_[j] != basic )
          place_nonbasic( j, x_[j], status_[j] );
      }
      if ( !refactor() )
        warmed = false;
    }
    if ( !warmed )
    {
      head_.resize( m_ );
      status_.assign( total, at_lower );
      x_.assign( total, 0.0 );
      for ( int r = 0; r < m_; ++r )
      {
        head_[r] = n_ + r;
        status_[n_ + r] = basic;
      }
      for ( int j = 0; j < n_; ++j )
      {
        double v = start ? ( *start )[j] : ( std::isfinite( lb_[j] ) ? lb_[j] : std::isfinite( ub_[j] ) ? ub_[j] : 0.0 );
        place_nonbasic( j, v, free_ );
      }
      if ( !refactor() )
      {
        res.status = lp_status::numerical_failure;
        return res;
      }
    }
    compute_basics();

    long max_iter = opts_.max_iterations >= 0 ? opts_.max_iterations : 100L * ( n_ + m_ ) + 10000;
    res.status = iterate( max_iter, res.iterations );
    if ( res.status == lp_status::optimal )
    {
      res.status = push_superbasics( max_iter, res.iterations );
      if ( res.status == lp_status::optimal )
      {
        refactor();
        compute_basics();
        if ( max_basic_infeasibility() > 1e3 * opts_.feasibility_tol )
        {
          // numerical drift; continue from the fresh factorization
          res.status = iterate( max_iter, res.iterations );
          if ( res.status == lp_status::optimal )
            res.status = push_superbasics( max_iter, res.iterations );
        }
      }
    }

    res.x.assign( x_.begin(), x_.begin() + n_ );
    res.objective = 0.0;
    for ( int j = 0; j < n_; ++j )
      res.objective += cost_[j] * res.x[j];
    res.basis = simplex_basis{ head_, status_, x_ };
    return res;
  }

  /* state of the last solve; columns are the structurals followed by one logical per row */
  int num_structurals() const { return n_; }
  int num_rows() const { return m_; }
  int basic_column( int p ) const { return head_[p]; }
  double value( int j ) const { return x_[j]; }
  double lower( int j ) const { return lb_[j]; }
  double upper( int j ) const { return ub_[j]; }
  bool is_basic( int j ) const { return status_[j] == basic; }
  bool nonbasic_at_upper( int j ) const { return status_[j] == at_upper; }
  bool nonbasic_at_lower( int j ) const { return status_[j] == at_lower; }

  /*! \brief Row p of the tableau: x_head[p] + sum alpha_j x_j = 0 over nonbasic columns j with alpha_j != 0. */
  std::vector<std::pair<int, double>> tableau_row( int p ) const
  {
    Eigen::VectorXd e = Eigen::VectorXd::Zero( m_ );
    e[p] = 1.0;
    Eigen::VectorXd rho = btran( e );
    std::vector<std::pair<int, double>> row;
    for ( int j = 0; j < n_ + m_; ++j )
    {
      if ( status_[j] == basic )
        continue;
      double a = 0.0;
      for_column( j, [&]( int r, double v ) { a += rho[r] * v; } );
      if ( std::fabs( a ) > 1e-11 )
        row.emplace_back( j, a );
    }
    return row;
  }

  /*! \brief Reduced costs of all columns at the last basis (zero for basic ones). */
  std::vector<double> reduced_costs() const
  {
    Eigen::VectorXd cb( m_ );
    for ( int p = 0; p < m_; ++p )
      cb[p] = cost_[head_[p]];
    Eigen::VectorXd y = btran( cb );
    std::vector<double> d( n_ + m_, 0.0 );
    for ( int j = 0; j < n_ + m_; ++j )
    {
      if ( status_[j] == basic )
        continue;
      double v = j < n_ ? cost_[j] : 0.0;
      for_column( j, [&]( int r, double a ) { v -= y[r] * a; } );
      d[j] = v;
    }
    return d;
  }

private:
  static constexpr std::int8_t basic = 0;
  static constexpr std::int8_t at_lower = 1;
  static constexpr std::int8_t at_upper = 2;
  static constexpr std::int8_t free_ = 3; // nonbasic strictly between bounds (or free)

  struct eta
  {
    int pos;
    double pivot;
    std::vector<std::pair<int, double>> column; // off-pivot entries of alpha
  };

  /* sets nonbasic column j to value v, snapping to a bound when it is on (or outside) one */
  void place_nonbasic( int j, double v, std::int8_t hint )
  {
    if ( hint == at_lower && std::isfinite( lb_[j] ) )
      v = lb_[j];
    else if ( hint == at_upper && std::isfinite( ub_[j] ) )
      v = ub_[j];
    if ( std::isfinite( lb_[j] ) && v <= lb_[j] )
    {
      x_[j] = lb_[j];
      status_[j] = at_lower;
    }
    else if ( std::isfinite( ub_[j] ) && v >= ub_[j] )
    {
      x_[j] = ub_[j];
      status_[j] = at_upper;
    }
    else
    {
      x_[j] = v;
      status_[j] = free_;
    }
  }

  template<typename Fn>
  void for_column( int j, Fn&& fn ) const
  {
    if ( j < n_ )
    {
      for ( int k = col_start_[j]; k < col_start_[j + 1]; ++k )
        fn( row_idx_[k], value_[k] );
    }
    else
    {
      fn( j - n_, -1.0 );
    }
  }

  bool refactor()
  {
    etas_.clear();
    if ( m_ == 0 )
      return true; // nothing to factor; SparseLU rejects empty matrices
    std::vector<Eigen::Triplet<double>> trips;
    for ( int p = 0; p < m_; ++p )
      for_column( head_[p], [&]( int r, double a ) { trips.emplace_back( r, p, a ); } );
    Eigen::SparseMatrix<double> b( m_, m_ );
    b.setFromTriplets( trips.begin(), trips.end() );
    b.makeCompressed();
    lu_.analyzePattern( b );
    lu_.factorize( b );
    return lu_.info() == Eigen::Success;
  }

  Eigen::VectorXd ftran( Eigen::VectorXd v ) const
  {
    if ( m_ == 0 )
      return v;
    v = lu_.solve( v );
    for ( auto const& e : etas_ )
    {
      double vp = v[e.pos] / e.pivot;
      v[e.pos] = vp;
      if ( vp != 0.0 )
      {
        for ( auto [i, a] : e.column )
          v[i] -= a * vp;
      }
    }
    return v;
  }

  Eigen::VectorXd btran( Eigen::VectorXd v ) const
  {
    if ( m_ == 0 )
      return v;
    for ( auto it = etas_.rbegin(); it != etas_.rend(); ++it )
    {
      double s = v[it->pos];
      for ( auto [i, a] : it->column )
        s -= a * v[i];
      v[it->pos] = s / it->pivot;
    }
    return lu_.transpose().solve( v );
  }

  void compute_basics()
  {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero( m_ );
    for ( int j = 0; j < n_ + m_; ++j )
    {
      if ( status_[j] != basic && x_[j] != 0.0 )
        for_column( j, [&]( int r, double a ) { rhs[r] -= a * x_[j]; } );
    }
    Eigen::VectorXd xb = ftran( rhs );
    for ( int p = 0; p < m_; ++p )
      x_[head_[p]] = xb[p];
  }

  double max_basic_infeasibility() const
  {
    double worst = 0.0;
    for ( int p = 0; p < m_; ++p )
    {
      int j = head_[p];
      worst = std::max( { worst, lb_[j] - x_[j], x_[j] - ub_[j] } );
    }
    return worst;
  }

  double reduced_cost( int j, const Eigen::VectorXd& y, bool phase1 ) const
  {
    double d = phase1 ? 0.0 : cost_[j];
    for_column( j, [&]( int r, double a ) { d -= y[r] * a; } );
    return d;
  }

  /* can nonbasic j improve the objective when moved in the direction opposite to its reduced cost? */
  bool eligible( int j, double d ) const
  {
    if ( lb_[j] == ub_[j] )
      return false;
    double tol = opts_.optimality_tol;
    switch ( status_[j] )
    {
    case at_lower: return d < -tol;
    case at_upper: return d > tol;
    case free_: return std::fabs( d ) > tol;
    default: return false;
    }
  }

  struct step
  {
    bool bounded = false;
    bool flip = false; // entering column reaches its own bound, no basis change
    int pos = -1;      // leaving basis position
    double theta = 0.0;
    bool leave_at_upper = false;
  };

  /* Harris two-pass ratio test for moving column q by theta * dir */
  step ratio_test( int q, int dir, const Eigen::VectorXd& alpha, bool phase1, bool bland ) const
  {
    const double tol = opts_.feasibility_tol;
    step s;

    double own = dir > 0 ? ub_[q] - x_[q] : x_[q] - lb_[q];
    double theta_max = std::isfinite( own ) ? own : infinity;

    struct cand
    {
      int pos;
      double dist; // distance to the blocking bound, clipped at 0
      double rate;
      bool upper;
      double slack; // signed distance plus tolerance, for the first Harris pass
    };
    std::vector<cand> cands;
    for ( int p = 0; p < m_; ++p )
    {
      double a = alpha[p];
      if ( std::fabs( a ) <= opts_.pivot_tol )
        continue;
      int j = head_[p];
      double rate = -dir * a; // d x_j / d theta
      double xv = x_[j];
      if ( rate < 0 )
      {
        if ( xv > ub_[j] + tol ) // infeasible above: first breakpoint is the upper bound
          cands.push_back( { p, xv - ub_[j], -rate, true, xv - ub_[j] } );
        else if ( std::isfinite( lb_[j] ) && xv >= lb_[j] - tol )
          cands.push_back( { p, std::max( 0.0, xv - lb_[j] ), -rate, false, xv - lb_[j] + tol } );
      }
      else
      {
        if ( xv < lb_[j] - tol )
          cands.push_back( { p, lb_[j] - xv, rate, false, lb_[j] - xv } );
        else if ( std::isfinite( ub_[j] ) && xv <= ub_[j] + tol )
          cands.push_back( { p, std::max( 0.0, ub_[j] - xv ), rate, true, ub_[j] - xv + tol } );
      }
      (void)phase1;
    }

    // Bland mode uses the exact minimum ratio; the Harris slack could break its termination argument
    double harris = theta_max;
    for ( auto const& c : cands )
      harris = std::min( harris, ( bland ? c.dist : c.slack ) / c.rate );
    if ( !std::isfinite( harris ) )
      return s; // unbounded direction

    s.bounded = true;
    int best = -1;
    double best_key = -1.0;
    for ( std::size_t k = 0; k < cands.size(); ++k )
    {
      auto const& c = cands[k];
      if ( c.dist / c.rate > harris )
        continue;
      if ( bland )
      {
        // smallest leaving column index among the tied minimum ratios
        double ratio = c.dist / c.rate;
        if ( best < 0 || ratio < best_key - 1e-12 || ( ratio <= best_key + 1e-12 && head_[c.pos] < head_[cands[best].pos] ) )
        {
          best = static_cast<int>( k );
          best_key = ratio;
        }
      }
      else if ( c.rate > best_key )
      {
        best = static_cast<int>( k );
        best_key = c.rate;
      }
    }
    if ( best < 0 || ( std::isfinite( own ) && own <= cands[best].dist / cands[best].rate ) )
    {
      s.flip = true;
      s.theta = own;
      return s;
    }
    s.pos = cands[best].pos;
    s.theta = cands[best].dist / cands[best].rate;
    s.leave_at_upper = cands[best].upper;
    return s;
  }

  void apply( int q, int dir, const Eigen::VectorXd& alpha, const step& s )
  {
    double t = s.theta;
    if ( t != 0.0 )
    {
      x_[q] += dir * t;
      for ( int p = 0; p < m_; ++p )
      {
        if ( alpha[p] != 0.0 )
          x_[head_[p]] -= dir * t * alpha[p];
      }
    }
    if ( s.flip )
    {
      if ( dir > 0 )
      {
        x_[q] = ub_[q];
        status_[q] = at_upper;
      }
      else
      {
        x_[q] = lb_[q];
        status_[q] = at_lower;
      }
      return;
    }
    int leaving = head_[s.pos];
    if ( s.leave_at_upper )
    {
      x_[leaving] = ub_[leaving];
      status_[leaving] = at_upper;
    }
    else
    {
      x_[leaving] = lb_[leaving];
      status_[leaving] = at_lower;
    }
    head_[s.pos] = q;
    status_[q] = basic;

    eta e{ s.pos, alpha[s.pos], {} };
    for ( int p = 0; p < m_; ++p )
    {
      if ( p != s.pos && alpha[p] != 0.0 )
        e.column.emplace_back( p, alpha[p] );
    }
    etas_.push_back( std::move( e ) );
  }

  Eigen::VectorXd column_vector( int q ) const
  {
    Eigen::VectorXd a = Eigen::VectorXd::Zero( m_ );
    for_column( q, [&]( int r, double v ) { a[r] = v; } );
    return a;
  }

  bool past_deadline( long iter ) const
  {
    return opts_.deadline && iter % 64 == 0 && std::chrono::steady_clock::now() > *opts_.deadline;
  }

  lp_status iterate( long max_iter, long& iter )
  {
    const double tol = opts_.feasibility_tol;
    int degenerate = 0;
    bool bland = false;
    Eigen::VectorXd cb( m_ );

    while ( true )
    {
      if ( iter >= max_iter )
        return lp_status::iteration_limit;
      if ( past_deadline( iter ) )
        return lp_status::time_limit;
      if ( static_cast<int>( etas_.size() ) >= opts_.refactor_interval )
      {
        if ( !refactor() )
          return lp_status::numerical_failure;
        compute_basics();
      }

      bool phase1 = false;
      for ( int p = 0; p < m_; ++p )
      {
        int j = head_[p];
        if ( x_[j] < lb_[j] - tol )
        {
          cb[p] = -1.0;
          phase1 = true;
        }
        else if ( x_[j] > ub_[j] + tol )
        {
          cb[p] = 1.0;
          phase1 = true;
        }
        else
        {
          cb[p] = 0.0;
        }
      }
      if ( !phase1 )
      {
        for ( int p = 0; p < m_; ++p )
          cb[p] = cost_[head_[p]];
      }
      Eigen::VectorXd y = btran( cb );

      int q = -1;
      double best = 0.0, dq = 0.0;
      for ( int j = 0; j < n_ + m_; ++j )
      {
        if ( status_[j] == basic )
          continue;
        double d = reduced_cost( j, y, phase1 );
        if ( !eligible( j, d ) )
          continue;
        if ( bland )
        {
          q = j;
          dq = d;
          break;
        }
        if ( std::fabs( d ) > best )
        {
          best = std::fabs( d );
          q = j;
          dq = d;
        }
      }
      if ( q < 0 )
        return phase1 ? lp_status::infeasible : lp_status::optimal;

      int dir = dq < 0 ? 1 : -1;
      Eigen::VectorXd alpha = ftran( column_vector( q ) );
      step s = ratio_test( q, dir, alpha, phase1, bland );
      if ( !s.bounded )
        return phase1 ? lp_status::numerical_failure : lp_status::unbounded;
      apply( q, dir, alpha, s );
      ++iter;

      // once switched on, Bland's rule stays on until this solve ends
      if ( s.theta <= 1e-9 )
      {
        if ( ++degenerate > opts_.degenerate_run )
          bland = true;
      }
      else
        degenerate = 0;
    }
  }

  /* moves every superbasic column to a finite bound; the objective is stationary along these moves */
  lp_status push_superbasics( long max_iter, long& iter )
  {
    for ( int j = 0; j < n_ + m_; ++j )
    {
      while ( status_[j] == free_ && ( std::isfinite( lb_[j] ) || std::isfinite( ub_[j] ) ) )
      {
        if ( iter >= max_iter )
          return lp_status::iteration_limit;
        if ( static_cast<int>( etas_.size() ) >= opts_.refactor_interval )
        {
          if ( !refactor() )
            return lp_status::numerical_failure;
          compute_basics();
        }
        int dir = std::isfinite( lb_[j] ) ? -1 : 1;
        Eigen::VectorXd alpha = ftran( column_vector( j ) );
        step s = ratio_test( j, dir, alpha, false, false );
        if ( !s.bounded )
          break;
        apply( j, dir, alpha, s );
        ++iter;
      }
    }
    return lp_status::optimal;
  }

  int n_, m_;
  std::vector<int> col_start_, row_idx_;
  std::vector<double> value_;
  std::vector<double> cost_, row_lb_, row_ub_;

  simplex_options opts_;
  std::vector<double> lb_, ub_, x_;
  std::vector<int> head_;
  std::vector<std::int8_t> status_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_; // transpose() is non-const
  std::vector<eta> etas_;
};

} // namespace mphase
