/*!
  \file error.hpp
  \brief Error type shared by all mphase components
*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mphase
{

enum class error_category
{
  parse,        // malformed .bench text
  structure,    // netlist/graph invariant broken (cycles, dangling nets)
  parameter,    // invalid phase count, loop depth, mode combination
  solver,       // numerical failure, unexpected infeasibility
  verification, // simulation mismatch or synchronization violation
  io
};

inline std::string_view to_string( error_category c )
{
  switch ( c )
  {
  case error_category::parse: return "parse error";
  case error_category::structure: return "structure error";
  case error_category::parameter: return "parameter error";
  case error_category::solver: return "solver error";
  case error_category::verification: return "verification error";
  case error_category::io: return "i/o error";
  }
  return "error";
}

/*! \brief Exception carrying a category and an optional source location (e.g. a line number). */
class error : public std::runtime_error
{
public:
  error( error_category category, const std::string& message, std::string location = {} )
      : std::runtime_error( message ), category_( category ), location_( std::move( location ) )
  {
  }

  error_category category() const noexcept { return category_; }
  const std::string& location() const noexcept { return location_; }

  /*! \brief `<category>[ at <location>]: <message>` */
  std::string describe() const
  {
    std::string s{ to_string( category_ ) };
    if ( !location_.empty() )
    {
      s += " at " + location_;
    }
    s += ": ";
    s += what();
    return s;
  }

private:
  error_category category_;
  std::string location_;
};

} // namespace mphase
