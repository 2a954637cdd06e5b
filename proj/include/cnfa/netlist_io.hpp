#pragma once

#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "error.hpp"
#include "netlist.hpp"
#include "units.hpp"

namespace cnfa
{

/*
 * Netlist text format (`.cnl`)
 *
 *   * <netlist name>                  first line, when it is a comment, is the title
 *   .inputs a b c
 *   .outputs sum cout
 *   .count 13                         declared transistor count
 *   MN1 out in gnd NCNFET chirality=(19,0) tubes=3
 *   MP1 out in vdd PMOS w=128nm l=32nm
 *   C1 out gnd 2.1fF                  also: C1 out gnd CAP 2.1fF
 *   VSRC Vin a gnd pwl (0 0 1ps 0.65V)
 *   VSRC Vdd vdd gnd dc 0.65V
 *   .end
 *
 * `*` starts a full-line comment, `;` a trailing one, and a leading `+`
 * continues the previous card. Keywords and nets are case-insensitive.
 */

namespace detail
{

struct token
{
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
};

struct card
{
  std::vector<token> tokens;
  std::size_t line = 0;
};

inline bool is_separator( char c )
{
  return c == '(' || c == ')' || c == '=' || c == ',';
}

inline void tokenize_into( std::string_view line, std::size_t line_no, std::size_t first_column, std::vector<token>& out )
{
  std::size_t i = 0;
  while ( i < line.size() )
  {
    char const c = line[i];
    if ( c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f' )
    {
      ++i;
      continue;
    }
    if ( is_separator( c ) )
    {
      out.push_back( { std::string( 1, c ), line_no, first_column + i } );
      ++i;
      continue;
    }
    std::size_t j = i;
    while ( j < line.size() && !is_separator( line[j] ) && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' &&
            line[j] != '\v' && line[j] != '\f' )
      ++j;
    out.push_back( { std::string( line.substr( i, j - i ) ), line_no, first_column + i } );
    i = j;
  }
}

inline std::vector<card> split_cards( std::string_view text, std::string& title )
{
  std::vector<card> cards;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while ( pos <= text.size() )
  {
    auto const nl = text.find( '\n', pos );
    auto line = text.substr( pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos );
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if ( line_no == 1 && !line.empty() && line.front() == '*' )
    {
      title = std::string( trim( line.substr( 1 ) ) );
      continue;
    }
    if ( auto const c = line.find( ';' ); c != std::string_view::npos )
      line = line.substr( 0, c );
    auto const first = line.find_first_not_of( " \t\r" );
    if ( first == std::string_view::npos || line[first] == '*' )
      continue;
    if ( line[first] == '+' )
    {
      if ( cards.empty() )
        throw parse_error( line_no, first + 1, "continuation line without a preceding card" );
      tokenize_into( line.substr( first + 1 ), line_no, first + 2, cards.back().tokens );
      continue;
    }
    card c;
    c.line = line_no;
    tokenize_into( line, line_no, 1, c.tokens );
    if ( !c.tokens.empty() )
      cards.push_back( std::move( c ) );
  }
  return cards;
}

class card_reader
{
public:
  explicit card_reader( card const& c ) : card_( c ) {}

  bool done() const { return pos_ >= card_.tokens.size(); }
  std::size_t remaining() const { return card_.tokens.size() - pos_; }

  token const& peek( std::size_t ahead = 0 ) const
  {
    if ( pos_ + ahead >= card_.tokens.size() )
      return end_token();
    return card_.tokens[pos_ + ahead];
  }

  token const& next( char const* expected )
  {
    if ( done() )
    {
      if ( card_.tokens.empty() )
        throw parse_error( card_.line, 1, "empty card", expected );
      auto const& last = card_.tokens.back();
      throw parse_error( last.line, last.column + last.text.size(), "unexpected end of card", expected );
    }
    return card_.tokens[pos_++];
  }

  void expect( std::string_view text, char const* expected )
  {
    auto const& t = next( expected );
    if ( t.text != text )
      throw parse_error( t.line, t.column, "unexpected '" + t.text + "'", expected );
  }

  [[noreturn]] void fail( token const& t, std::string const& msg, std::string expected = {} ) const
  {
    throw parse_error( t.line, t.column, msg, std::move( expected ) );
  }

private:
  token const& end_token() const
  {
    static token const none{};
    return none;
  }

  card const& card_;
  std::size_t pos_ = 0;
};

inline double quantity_token( card_reader& r, token const& t )
{
  try
  {
    return parse_quantity( t.text );
  }
  catch ( invalid_argument const& e )
  {
    r.fail( t, e.what(), "number with unit suffix" );
  }
}

inline std::string net_token( card_reader& r, token const& t )
{
  try
  {
    return net_name( t.text );
  }
  catch ( invalid_argument const& e )
  {
    r.fail( t, e.what(), "net name" );
  }
}

inline std::uint32_t uint_token( card_reader& r, token const& t )
{
  std::uint32_t v = 0;
  auto const [ptr, ec] = std::from_chars( t.text.data(), t.text.data() + t.text.size(), v );
  if ( ec != std::errc{} || ptr != t.text.data() + t.text.size() )
    r.fail( t, "expected a non-negative integer, got '" + t.text + "'", "integer" );
  return v;
}

inline pwl parse_waveform( card_reader& r )
{
  auto const& mode = r.next( "dc or pwl" );
  auto const m = to_lower( mode.text );
  if ( m == "dc" )
  {
    auto const& v = r.next( "value" );
    return pwl::dc( quantity_token( r, v ) );
  }
  if ( m != "pwl" )
    r.fail( mode, "unknown source mode '" + mode.text + "'", "dc or pwl" );
  r.expect( "(", "'('" );
  pwl w;
  while ( r.peek().text != ")" )
  {
    auto const& tt = r.next( "time" );
    if ( tt.text == "," )
      continue;
    double const t = quantity_token( r, tt );
    auto const* vt = &r.next( "value" );
    if ( vt->text == "," )
      vt = &r.next( "value" );
    double const v = quantity_token( r, *vt );
    if ( !w.points.empty() && !( t > w.points.back().first ) )
      r.fail( tt, "pwl time points must be strictly increasing" );
    w.points.emplace_back( t, v );
  }
  r.expect( ")", "')'" );
  if ( w.points.empty() )
    r.fail( mode, "pwl needs at least one point" );
  return w;
}

inline void parse_transistor_params( card_reader& r, token const& head, device_instance& d )
{
  bool have_chirality = false;
  while ( !r.done() )
  {
    auto const& key = r.next( "parameter" );
    auto const k = to_lower( key.text );
    r.expect( "=", "'='" );
    if ( is_cnfet( d.kind ) && k == "chirality" )
    {
      r.expect( "(", "'('" );
      auto const& a = r.next( "n1" );
      auto const n1 = uint_token( r, a );
      r.expect( ",", "','" );
      auto const n2 = uint_token( r, r.next( "n2" ) );
      r.expect( ")", "')'" );
      if ( n1 == 0u && n2 == 0u )
        r.fail( a, "chirality (0,0) does not describe a nanotube" );
      d.chirality = chirality_vector( n1, n2 );
      have_chirality = true;
    }
    else if ( is_cnfet( d.kind ) && k == "tubes" )
    {
      auto const& t = r.next( "tube count" );
      auto const n = uint_token( r, t );
      if ( n == 0u || n > 100000u )
        r.fail( t, "tube count must be positive" );
      d.tubes = static_cast<int>( n );
    }
    else if ( !is_cnfet( d.kind ) && ( k == "w" || k == "l" ) )
    {
      auto const& t = r.next( "length" );
      double const v = quantity_token( r, t );
      if ( !( v > 0.0 ) )
        r.fail( t, "transistor dimensions must be positive" );
      ( k == "w" ? d.w : d.l ) = v;
    }
    else
      r.fail( key, "unknown parameter '" + key.text + "' for " + std::string( kind_keyword( d.kind ) ),
              is_cnfet( d.kind ) ? "chirality or tubes" : "w or l" );
  }
  if ( is_cnfet( d.kind ) && !have_chirality )
    r.fail( head, "device '" + d.id + "' lacks chirality", "chirality=(n1,n2)" );
}

} // namespace detail

/*! \brief Parses netlist text; throws `cnfa::parse_error` with line and column. */
inline netlist parse_netlist( std::string_view text )
{
  std::string title;
  auto const cards = detail::split_cards( text, title );
  if ( title.find( '\r' ) != std::string::npos )
    throw parse_error( 1, title.find( '\r' ) + 3, "carriage return inside the title line" );
  netlist n( title );

  auto add_device = [&]( detail::card_reader& r, detail::token const& id_token, device_instance d ) {
    if ( n.find( d.id ) )
      r.fail( id_token, "duplicate device id '" + d.id + "'" );
    try
    {
      n.add( std::move( d ) );
    }
    catch ( invalid_argument const& e )
    {
      r.fail( id_token, e.what() );
    }
  };

  for ( auto const& c : cards )
  {
    detail::card_reader r( c );
    auto const& head = r.next( "card" );
    auto const word = detail::to_lower( head.text );

    if ( word == ".end" )
      break;
    if ( word == ".inputs" || word == ".outputs" )
    {
      if ( r.done() )
        r.fail( head, "port list is empty", "net names" );
      while ( !r.done() )
      {
        auto const net = detail::net_token( r, r.next( "net" ) );
        word == ".inputs" ? n.add_input( net ) : n.add_output( net );
      }
      continue;
    }
    if ( word == ".count" )
    {
      auto const& t = r.next( "transistor count" );
      auto const v = detail::uint_token( r, t );
      if ( v > 1000000u )
        r.fail( t, "transistor count out of range" );
      n.set_declared_count( static_cast<int>( v ) );
      if ( !r.done() )
        r.fail( r.peek(), "trailing tokens after .count" );
      continue;
    }
    if ( !word.empty() && word.front() == '.' )
      r.fail( head, "unknown directive '" + head.text + "'", ".inputs, .outputs, .count or .end" );
    if ( detail::is_separator( head.text.front() ) )
      r.fail( head, "unexpected '" + head.text + "'", "device card" );

    if ( word == "vsrc" )
    {
      auto const& id = r.next( "source id" );
      if ( detail::is_separator( id.text.front() ) )
        r.fail( id, "bad source id", "identifier" );
      device_instance d;
      d.id = id.text;
      d.kind = device_kind::vsrc;
      d.terminals.push_back( detail::net_token( r, r.next( "plus net" ) ) );
      d.terminals.push_back( detail::net_token( r, r.next( "minus net" ) ) );
      d.source = detail::parse_waveform( r );
      if ( !r.done() )
        r.fail( r.peek(), "trailing tokens after source" );
      add_device( r, id, std::move( d ) );
      continue;
    }

    // <id> <nets...> KIND params   or   <id> a b <value>
    device_instance d;
    d.id = head.text;
    auto const& t3 = r.peek( 2 );
    auto const& t4 = r.peek( 3 );
    auto const kind4 = kind_from_keyword( t4.text );
    auto const kind3 = kind_from_keyword( t3.text );
    if ( kind4 && is_transistor( *kind4 ) )
    {
      d.kind = *kind4;
      for ( int i = 0; i < 3; ++i )
        d.terminals.push_back( detail::net_token( r, r.next( "net" ) ) );
      r.next( "kind" );
      detail::parse_transistor_params( r, head, d );
    }
    else if ( kind3 == device_kind::cap || ( !kind3 && r.remaining() == 3u && !t3.text.empty() &&
                                             ( std::isdigit( static_cast<unsigned char>( t3.text.front() ) ) ||
                                               t3.text.front() == '.' || t3.text.front() == '+' || t3.text.front() == '-' ) ) )
    {
      d.kind = device_kind::cap;
      d.terminals.push_back( detail::net_token( r, r.next( "net" ) ) );
      d.terminals.push_back( detail::net_token( r, r.next( "net" ) ) );
      if ( kind3 )
        r.next( "kind" );
      auto const& v = r.next( "capacitance" );
      d.capacitance = detail::quantity_token( r, v );
      if ( !r.done() )
        r.fail( r.peek(), "trailing tokens after capacitance" );
    }
    else if ( kind3 || kind4 )
    {
      auto const& bad = kind3 ? t3 : t4;
      r.fail( bad, "wrong number of terminals for " + bad.text );
    }
    else
    {
      auto const& bad = r.peek( 3 ).text.empty() ? head : r.peek( 3 );
      r.fail( bad, "unknown device kind", "NCNFET, PCNFET, NMOS, PMOS, CAP or a capacitance" );
    }
    add_device( r, head, std::move( d ) );
  }
  return n;
}

/*! \brief Either a parsed netlist or the diagnostic explaining why not. */
using parse_outcome = std::variant<netlist, parse_error>;

/*! \brief Non-throwing parse. Every input produces a netlist or a positioned diagnostic. */
inline parse_outcome try_parse_netlist( std::string_view text )
{
  try
  {
    return parse_netlist( text );
  }
  catch ( parse_error const& e )
  {
    return e;
  }
  catch ( error const& e )
  {
    return parse_error( 0, 0, e.what() );
  }
}

/*! \brief Writes the canonical text of a netlist. Device order is preserved. */
inline std::string emit_netlist( netlist const& n )
{
  std::ostringstream out;
  out << "* " << n.name() << "\n";
  if ( !n.inputs().empty() )
  {
    out << ".inputs";
    for ( auto const& p : n.inputs() )
      out << ' ' << p;
    out << "\n";
  }
  if ( !n.outputs().empty() )
  {
    out << ".outputs";
    for ( auto const& p : n.outputs() )
      out << ' ' << p;
    out << "\n";
  }
  if ( n.declared_count() )
    out << ".count " << *n.declared_count() << "\n";
  for ( auto const& d : n.devices() )
  {
    switch ( d.kind )
    {
    case device_kind::ncnfet:
    case device_kind::pcnfet:
      out << d.id << ' ' << d.drain() << ' ' << d.gate() << ' ' << d.source_net() << ' ' << kind_keyword( d.kind )
          << " chirality=(" << d.chirality.n1() << ',' << d.chirality.n2() << ')';
      if ( d.tubes > 0 )
        out << " tubes=" << d.tubes;
      break;
    case device_kind::nmos:
    case device_kind::pmos:
      out << d.id << ' ' << d.drain() << ' ' << d.gate() << ' ' << d.source_net() << ' ' << kind_keyword( d.kind );
      if ( d.w > 0.0 )
        out << " w=" << format_quantity( d.w, "m" );
      if ( d.l > 0.0 )
        out << " l=" << format_quantity( d.l, "m" );
      break;
    case device_kind::cap:
      out << d.id << ' ' << d.terminals[0] << ' ' << d.terminals[1] << ' ' << format_quantity( d.capacitance, "F" );
      break;
    case device_kind::vsrc:
      out << "VSRC " << d.id << ' ' << d.terminals[0] << ' ' << d.terminals[1];
      if ( d.source.is_dc() )
        out << " dc " << format_quantity( d.source.points.front().second, "V" );
      else
      {
        out << " pwl (";
        for ( std::size_t i = 0; i < d.source.points.size(); ++i )
          out << ( i ? " " : "" ) << format_quantity( d.source.points[i].first, "s" ) << ' '
              << format_quantity( d.source.points[i].second, "V" );
        out << ")";
      }
      break;
    }
    out << "\n";
  }
  out << ".end\n";
  return out.str();
}

} // namespace cnfa
