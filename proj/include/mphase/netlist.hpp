/*!
  \file netlist.hpp
  \brief Gate-level netlists: ISCAS `.bench` reader/writer and phase-annotated netlists

  The reader accepts the usual ISCAS85/89 dialect:

      # comment
      INPUT(G0)
      OUTPUT(G17)
      G5 = DFF(G10)
      G8 = AND(G14, G6)

  Annotated netlists are written as plain `.bench` with the clocking
  information carried in `#` directives, so third-party tools can still
  load them.
*/

#pragma once

#include "error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mphase
{

enum class gate_op : std::uint8_t
{
  and_,
  nand_,
  or_,
  nor_,
  xor_,
  xnor_,
  not_,
  buff,
  dff
};

inline constexpr std::array<std::string_view, 9> gate_op_names{
    "AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUFF", "DFF" };

inline std::string_view to_string( gate_op op )
{
  return gate_op_names[static_cast<std::size_t>( op )];
}

inline std::optional<gate_op> gate_op_from_string( std::string_view s )
{
  for ( std::size_t i = 0; i < gate_op_names.size(); ++i )
  {
    if ( gate_op_names[i] == s )
    {
      return static_cast<gate_op>( i );
    }
  }
  return std::nullopt;
}

inline bool is_unary( gate_op op )
{
  return op == gate_op::not_ || op == gate_op::buff || op == gate_op::dff;
}

/*! \brief Evaluates a combinational gate function over its fanin values.

  DFF evaluates as identity here; its sequential behavior lives in the simulators.
*/
template<typename Range>
bool evaluate_gate( gate_op op, const Range& fanins )
{
  bool acc_and = true, acc_or = false, acc_xor = false;
  for ( bool v : fanins )
  {
    acc_and = acc_and && v;
    acc_or = acc_or || v;
    acc_xor = acc_xor != v;
  }
  switch ( op )
  {
  case gate_op::and_: return acc_and;
  case gate_op::nand_: return !acc_and;
  case gate_op::or_: return acc_or;
  case gate_op::nor_: return !acc_or;
  case gate_op::xor_: return acc_xor;
  case gate_op::xnor_: return !acc_xor;
  case gate_op::not_: return !acc_or;
  case gate_op::buff:
  case gate_op::dff: return acc_or;
  }
  return false;
}

struct cell
{
  std::string output;
  gate_op op;
  std::vector<std::string> fanins;

  bool operator==( const cell& ) const = default;
};

struct netlist
{
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<cell> cells;

  bool operator==( const netlist& ) const = default;

  std::size_t num_registers() const
  {
    return static_cast<std::size_t>( std::count_if( cells.begin(), cells.end(), []( const cell& c ) { return c.op == gate_op::dff; } ) );
  }
  std::size_t num_gates() const { return cells.size() - num_registers(); }
};

/*! \brief Suffix marking primary-output interface nodes in id maps. */
inline constexpr std::string_view po_suffix = "$po";

inline std::string po_id( std::string_view port )
{
  return std::string( port ) + std::string( po_suffix );
}

inline bool is_valid_name( std::string_view s )
{
  return !s.empty() && std::all_of( s.begin(), s.end(), []( char ch ) {
    return std::isalnum( static_cast<unsigned char>( ch ) ) || ch == '_' || ch == '.';
  } );
}

namespace detail
{

inline std::string_view trim( std::string_view s )
{
  while ( !s.empty() && std::isspace( static_cast<unsigned char>( s.front() ) ) )
    s.remove_prefix( 1 );
  while ( !s.empty() && std::isspace( static_cast<unsigned char>( s.back() ) ) )
    s.remove_suffix( 1 );
  return s;
}

inline std::vector<std::string_view> split_lines( std::string_view text )
{
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while ( start <= text.size() )
  {
    auto end = text.find( '\n', start );
    if ( end == std::string_view::npos )
    {
      if ( start < text.size() )
        lines.push_back( text.substr( start ) );
      break;
    }
    auto line = text.substr( start, end - start );
    if ( !line.empty() && line.back() == '\r' )
      line.remove_suffix( 1 );
    lines.push_back( line );
    start = end + 1;
  }
  return lines;
}

inline std::string line_loc( std::size_t line_no )
{
  return "line " + std::to_string( line_no );
}

/* `KEYWORD(name)` -> name, or nullopt when the line is not of this form */
inline std::optional<std::string_view> declaration( std::string_view line, std::string_view keyword, std::size_t line_no )
{
  if ( line.substr( 0, keyword.size() ) != keyword )
    return std::nullopt;
  auto rest = trim( line.substr( keyword.size() ) );
  if ( rest.empty() || rest.front() != '(' )
    return std::nullopt;
  if ( rest.back() != ')' )
    throw error( error_category::parse, "missing ')' in " + std::string( keyword ) + " declaration", line_loc( line_no ) );
  auto name = trim( rest.substr( 1, rest.size() - 2 ) );
  if ( !is_valid_name( name ) )
    throw error( error_category::parse, "invalid net name '" + std::string( name ) + "'", line_loc( line_no ) );
  return name;
}

} // namespace detail

/*! \brief Checks the netlist invariants (single driver per net, resolved references, arity, unique names).

  `lines` optionally maps net names to source lines for error locations.
*/
inline void validate( const netlist& ntk, const std::unordered_map<std::string, std::size_t>* lines = nullptr )
{
  auto loc = [&]( const std::string& net ) -> std::string {
    if ( lines )
    {
      if ( auto it = lines->find( net ); it != lines->end() )
        return detail::line_loc( it->second );
    }
    return "net '" + net + "'";
  };

  std::unordered_map<std::string, int> drivers;
  std::set<std::string> declared_outputs;
  for ( auto const& in : ntk.inputs )
  {
    if ( !is_valid_name( in ) )
      throw error( error_category::parse, "invalid net name '" + in + "'", loc( in ) );
    if ( ++drivers[in] > 1 )
      throw error( error_category::structure, "net '" + in + "' is multiply driven", loc( in ) );
  }
  for ( auto const& c : ntk.cells )
  {
    if ( !is_valid_name( c.output ) )
      throw error( error_category::parse, "invalid net name '" + c.output + "'", loc( c.output ) );
    if ( ++drivers[c.output] > 1 )
      throw error( error_category::structure, "net '" + c.output + "' is multiply driven", loc( c.output ) );
    if ( is_unary( c.op ) ? c.fanins.size() != 1u : c.fanins.size() < 2u )
    {
      throw error( error_category::parse,
                   std::string( to_string( c.op ) ) + " '" + c.output + "' has " + std::to_string( c.fanins.size() ) +
                       ( is_unary( c.op ) ? " fanins, expected exactly 1" : " fanins, expected at least 2" ),
                   loc( c.output ) );
    }
  }
  for ( auto const& c : ntk.cells )
  {
    for ( auto const& f : c.fanins )
    {
      if ( !drivers.count( f ) )
        throw error( error_category::structure, "net '" + f + "' used by '" + c.output + "' is undriven", loc( c.output ) );
    }
  }
  for ( auto const& o : ntk.outputs )
  {
    if ( !declared_outputs.insert( o ).second )
      throw error( error_category::structure, "output '" + o + "' declared twice", loc( o ) );
    if ( !drivers.count( o ) )
      throw error( error_category::structure, "output '" + o + "' is undriven", loc( o ) );
  }
}

namespace detail
{

struct parsed_text
{
  netlist ntk;
  std::unordered_map<std::string, std::size_t> lines;
  std::vector<std::pair<std::size_t, std::string_view>> comments;
};

inline parsed_text parse_text( std::string_view text, std::string name )
{
  parsed_text r;
  r.ntk.name = std::move( name );
  auto remember = [&]( std::string_view net, std::size_t line_no ) {
    r.lines.emplace( std::string( net ), line_no );
  };

  std::vector<std::size_t> output_lines;
  std::size_t line_no = 0;
  for ( auto raw : split_lines( text ) )
  {
    ++line_no;
    auto line = raw;
    if ( auto hash = line.find( '#' ); hash != std::string_view::npos )
    {
      r.comments.emplace_back( line_no, trim( line.substr( hash + 1 ) ) );
      line = line.substr( 0, hash );
    }
    line = trim( line );
    if ( line.empty() )
      continue;

    if ( auto in = declaration( line, "INPUT", line_no ) )
    {
      r.ntk.inputs.emplace_back( *in );
      remember( *in, line_no );
      continue;
    }
    if ( auto out = declaration( line, "OUTPUT", line_no ) )
    {
      r.ntk.outputs.emplace_back( *out );
      output_lines.push_back( line_no );
      continue;
    }

    auto eq = line.find( '=' );
    if ( eq == std::string_view::npos )
      throw error( error_category::parse, "expected INPUT(..), OUTPUT(..) or '<net> = <OP>(..)'", line_loc( line_no ) );
    auto lhs = trim( line.substr( 0, eq ) );
    auto rhs = trim( line.substr( eq + 1 ) );
    if ( !is_valid_name( lhs ) )
      throw error( error_category::parse, "invalid net name '" + std::string( lhs ) + "'", line_loc( line_no ) );
    auto open = rhs.find( '(' );
    if ( open == std::string_view::npos || rhs.back() != ')' )
      throw error( error_category::parse, "malformed gate expression '" + std::string( rhs ) + "'", line_loc( line_no ) );
    auto op_name = trim( rhs.substr( 0, open ) );
    auto op = gate_op_from_string( op_name );
    if ( !op )
      throw error( error_category::parse, "unknown gate type '" + std::string( op_name ) + "'", line_loc( line_no ) );

    cell c{ std::string( lhs ), *op, {} };
    auto args = rhs.substr( open + 1, rhs.size() - open - 2 );
    if ( !trim( args ).empty() )
    {
      std::size_t pos = 0;
      while ( true )
      {
        auto comma = args.find( ',', pos );
        auto arg = trim( args.substr( pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos ) );
        if ( !is_valid_name( arg ) )
          throw error( error_category::parse, "invalid fanin name '" + std::string( arg ) + "'", line_loc( line_no ) );
        c.fanins.emplace_back( arg );
        if ( comma == std::string_view::npos )
          break;
        pos = comma + 1;
      }
    }
    if ( r.lines.count( c.output ) )
      throw error( error_category::structure, "net '" + c.output + "' is multiply driven", line_loc( line_no ) );
    remember( c.output, line_no );
    r.ntk.cells.push_back( std::move( c ) );
  }
  for ( std::size_t i = 0; i < r.ntk.outputs.size(); ++i )
  {
    // undriven outputs are reported at their declaration
    r.lines.emplace( r.ntk.outputs[i], output_lines[i] );
  }
  validate( r.ntk, &r.lines );
  return r;
}

} // namespace detail

/*! \brief Parses `.bench` text. Declaration order of inputs, outputs and cells is preserved. */
inline netlist parse_bench( std::string_view text, std::string name = {} )
{
  return detail::parse_text( text, std::move( name ) ).ntk;
}

/*! \brief Writes a netlist as `.bench` text (LF line endings). */
inline std::string write_bench( const netlist& ntk )
{
  std::ostringstream os;
  if ( !ntk.name.empty() )
    os << "# " << ntk.name << "\n";
  for ( auto const& in : ntk.inputs )
    os << "INPUT(" << in << ")\n";
  for ( auto const& out : ntk.outputs )
    os << "OUTPUT(" << out << ")\n";
  for ( auto const& c : ntk.cells )
  {
    os << c.output << " = " << to_string( c.op ) << "(";
    for ( std::size_t i = 0; i < c.fanins.size(); ++i )
      os << ( i ? ", " : "" ) << c.fanins[i];
    os << ")\n";
  }
  return os.str();
}

/*! \brief A clocked netlist: original cells plus inserted path-balancing DFFs, each element labeled
    with its phase depth and clock phase.

  Element ids are net names for primary inputs and cells, and `<port>$po` for the
  primary-output interface nodes. Register cells are labeled with the depth of their
  output side; their input side sits `d_loop()` deeper.
*/
struct annotated_netlist
{
  netlist base;
  /*! \brief Original output names, aligned with `base.outputs` (which name the physical nets feeding each port). */
  std::vector<std::string> ports;
  std::map<std::string, int> phase_of;
  std::map<std::string, long> depth_of;
  std::set<std::string> inserted;
  int n_phases = 1;
  int threads = 1;

  int d_loop() const { return threads * n_phases; }
  bool is_inserted( const std::string& net ) const { return inserted.count( net ) != 0; }

  bool operator==( const annotated_netlist& ) const = default;
};

inline int phase_of_depth( long depth, int n_phases )
{
  return static_cast<int>( ( depth - 1 ) % n_phases ) + 1;
}

/*! \brief Writes an annotated netlist as `.bench` with `# PHASE`/`# DEPTH`/`# PORT`/`# INSERTED` directives. */
inline std::string emit_bench( const annotated_netlist& an )
{
  std::ostringstream os;
  os << "# mphase annotated netlist";
  if ( !an.base.name.empty() )
    os << " " << an.base.name;
  os << "\n# PHASES " << an.n_phases << "\n# THREADS " << an.threads << "\n";
  netlist plain = an.base;
  plain.name.clear();
  os << write_bench( plain );
  for ( std::size_t i = 0; i < an.base.outputs.size(); ++i )
    os << "# PORT " << an.base.outputs[i] << " " << an.ports[i] << "\n";
  for ( auto const& c : an.base.cells )
  {
    if ( an.is_inserted( c.output ) )
      os << "# INSERTED " << c.output << "\n";
  }
  auto label = [&]( const std::string& id ) {
    os << "# PHASE " << id << " " << an.phase_of.at( id ) << "\n";
    os << "# DEPTH " << id << " " << an.depth_of.at( id ) << "\n";
  };
  for ( auto const& in : an.base.inputs )
    label( in );
  for ( auto const& c : an.base.cells )
    label( c.output );
  for ( auto const& p : an.ports )
    label( po_id( p ) );
  return os.str();
}

/*! \brief Reads back the output of `emit_bench`, directives included. */
inline annotated_netlist parse_annotated( std::string_view text, std::string name = {} )
{
  auto parsed = detail::parse_text( text, std::move( name ) );
  annotated_netlist an;
  an.base = std::move( parsed.ntk );
  std::map<std::string, std::string> port_of;
  bool saw_phases = false;

  for ( auto const& [line_no, comment] : parsed.comments )
  {
    std::istringstream is{ std::string( comment ) };
    std::string tag;
    is >> tag;
    auto bad = [&, line = line_no]() {
      return error( error_category::parse, "malformed '# " + tag + "' directive", detail::line_loc( line ) );
    };
    if ( tag == "PHASES" )
    {
      if ( !( is >> an.n_phases ) || an.n_phases < 1 )
        throw bad();
      saw_phases = true;
    }
    else if ( tag == "THREADS" )
    {
      if ( !( is >> an.threads ) || an.threads < 1 )
        throw bad();
    }
    else if ( tag == "PORT" )
    {
      std::string net, port;
      if ( !( is >> net >> port ) )
        throw bad();
      port_of[net] = port;
    }
    else if ( tag == "INSERTED" )
    {
      std::string net;
      if ( !( is >> net ) )
        throw bad();
      an.inserted.insert( net );
    }
    else if ( tag == "PHASE" )
    {
      std::string id;
      int k;
      if ( !( is >> id >> k ) )
        throw bad();
      an.phase_of[id] = k;
    }
    else if ( tag == "DEPTH" )
    {
      std::string id;
      long d;
      if ( !( is >> id >> d ) )
        throw bad();
      an.depth_of[id] = d;
    }
  }
  if ( !saw_phases )
    throw error( error_category::parse, "missing '# PHASES' directive" );

  for ( auto const& out : an.base.outputs )
  {
    auto it = port_of.find( out );
    an.ports.push_back( it == port_of.end() ? out : it->second );
  }
  auto require = [&]( const std::string& id ) {
    if ( !an.phase_of.count( id ) || !an.depth_of.count( id ) )
      throw error( error_category::parse, "element '" + id + "' has no phase/depth label" );
  };
  for ( auto const& in : an.base.inputs )
    require( in );
  for ( auto const& c : an.base.cells )
    require( c.output );
  for ( auto const& p : an.ports )
    require( po_id( p ) );
  for ( auto const& ins : an.inserted )
  {
    auto it = std::find_if( an.base.cells.begin(), an.base.cells.end(), [&]( const cell& c ) { return c.output == ins; } );
    if ( it == an.base.cells.end() || it->op != gate_op::dff )
      throw error( error_category::parse, "'" + ins + "' is marked INSERTED but is not a DFF cell" );
  }
  return an;
}

} // namespace mphase
