#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "device_physics.hpp"
#include "error.hpp"
#include "units.hpp"

namespace cnfa
{

/*! \brief Canonical (lower-case) net name. `vdd` and `gnd` are the rails. */
inline std::string net_name( std::string_view name )
{
  if ( name.empty() )
    throw invalid_argument( "empty net name" );
  for ( char c : name )
    if ( !std::isalnum( static_cast<unsigned char>( c ) ) && c != '_' )
      throw invalid_argument( "invalid net name '" + std::string( name ) + "'" );
  return detail::to_lower( name );
}

inline constexpr std::string_view vdd_net = "vdd";
inline constexpr std::string_view gnd_net = "gnd";

enum class device_kind
{
  ncnfet,
  pcnfet,
  nmos,
  pmos,
  cap,
  vsrc
};

inline std::string_view kind_keyword( device_kind k )
{
  switch ( k )
  {
  case device_kind::ncnfet: return "NCNFET";
  case device_kind::pcnfet: return "PCNFET";
  case device_kind::nmos: return "NMOS";
  case device_kind::pmos: return "PMOS";
  case device_kind::cap: return "CAP";
  case device_kind::vsrc: return "VSRC";
  }
  return "?";
}

inline std::optional<device_kind> kind_from_keyword( std::string_view word )
{
  auto const w = detail::to_lower( word );
  if ( w == "ncnfet" ) return device_kind::ncnfet;
  if ( w == "pcnfet" ) return device_kind::pcnfet;
  if ( w == "nmos" ) return device_kind::nmos;
  if ( w == "pmos" ) return device_kind::pmos;
  if ( w == "cap" ) return device_kind::cap;
  if ( w == "vsrc" ) return device_kind::vsrc;
  return std::nullopt;
}

inline bool is_transistor( device_kind k )
{
  return k == device_kind::ncnfet || k == device_kind::pcnfet || k == device_kind::nmos || k == device_kind::pmos;
}

inline bool is_cnfet( device_kind k )
{
  return k == device_kind::ncnfet || k == device_kind::pcnfet;
}

inline enum polarity polarity_of( device_kind k )
{
  return k == device_kind::pcnfet || k == device_kind::pmos ? polarity::p : polarity::n;
}

/*! \brief Piecewise-linear waveform; a single point is a DC value. */
struct pwl
{
  std::vector<std::pair<double, double>> points; // (time s, value V), time strictly increasing

  static pwl dc( double v ) { return pwl{ { { 0.0, v } } }; }

  bool is_dc() const noexcept { return points.size() == 1u; }

  double at( double t ) const
  {
    if ( points.empty() )
      return 0.0;
    if ( t <= points.front().first )
      return points.front().second;
    if ( t >= points.back().first )
      return points.back().second;
    auto const it = std::upper_bound( points.begin(), points.end(), t,
                                      []( double x, auto const& p ) { return x < p.first; } );
    auto const& [t1, v1] = *it;
    auto const& [t0, v0] = *std::prev( it );
    return v0 + ( v1 - v0 ) * ( t - t0 ) / ( t1 - t0 );
  }

  friend bool operator==( pwl const&, pwl const& ) = default;
};

/*! \brief One circuit element.
 *
 * Terminals: transistors (drain, gate, source); CAP and VSRC (plus, minus).
 */
struct device_instance
{
  std::string id;
  device_kind kind = device_kind::ncnfet;
  std::vector<std::string> terminals;

  chirality_vector chirality; // CNFET only
  int tubes = 0;              // CNFET only; 0 means the model default
  double w = 0.0;             // MOS only; 0 means the model default
  double l = 0.0;
  double capacitance = 0.0;   // CAP only
  pwl source;                 // VSRC only

  std::string const& drain() const { return terminals.at( 0 ); }
  std::string const& gate() const { return terminals.at( 1 ); }
  std::string const& source_net() const { return terminals.at( 2 ); }
};

/*! \brief Device ids: letters, digits, `_` and `-`, starting with a letter, digit or `_`; not `vsrc`. */
inline bool valid_device_id( std::string_view id )
{
  if ( id.empty() || id.front() == '-' || detail::to_lower( id ) == "vsrc" )
    return false;
  return std::all_of( id.begin(), id.end(), []( char c ) {
    return std::isalnum( static_cast<unsigned char>( c ) ) || c == '_' || c == '-';
  } );
}

inline std::size_t terminal_count( device_kind k )
{
  return is_transistor( k ) ? 3u : 2u;
}

/*! \brief Flat transistor-level netlist. */
class netlist
{
public:
  netlist() = default;
  explicit netlist( std::string name ) { set_name( std::move( name ) ); }

  std::string const& name() const noexcept { return name_; }
  void set_name( std::string name )
  {
    if ( name.find_first_of( "\r\n" ) != std::string::npos )
      throw invalid_argument( "netlist name must be a single line" );
    name_ = std::string( detail::trim( name ) );
  }

  std::vector<device_instance> const& devices() const noexcept { return devices_; }
  std::vector<std::string> const& inputs() const noexcept { return inputs_; }
  std::vector<std::string> const& outputs() const noexcept { return outputs_; }
  std::optional<int> declared_count() const noexcept { return declared_count_; }
  void set_declared_count( std::optional<int> n ) { declared_count_ = n; }

  void add_input( std::string_view net ) { add_port( inputs_, net ); }
  void add_output( std::string_view net ) { add_port( outputs_, net ); }

  device_instance const& add( device_instance d )
  {
    if ( !valid_device_id( d.id ) )
      throw invalid_argument( "invalid device id '" + d.id + "'" );
    if ( find( d.id ) )
      throw invalid_argument( "duplicate device id '" + d.id + "'" );
    if ( d.terminals.size() != terminal_count( d.kind ) )
      throw invalid_argument( "device '" + d.id + "': wrong number of terminals" );
    for ( auto& t : d.terminals )
      t = net_name( t );
    devices_.push_back( std::move( d ) );
    return devices_.back();
  }

  device_instance const& add_transistor( std::string id, device_kind kind, std::string_view drain, std::string_view gate,
                                         std::string_view source, chirality_vector c = {}, int tubes = 0 )
  {
    device_instance d;
    d.id = std::move( id );
    d.kind = kind;
    d.terminals = { std::string( drain ), std::string( gate ), std::string( source ) };
    d.chirality = c;
    d.tubes = tubes;
    return add( std::move( d ) );
  }

  device_instance const& add_mos( std::string id, device_kind kind, std::string_view drain, std::string_view gate,
                                  std::string_view source, double w, double l )
  {
    device_instance d;
    d.id = std::move( id );
    d.kind = kind;
    d.terminals = { std::string( drain ), std::string( gate ), std::string( source ) };
    d.w = w;
    d.l = l;
    return add( std::move( d ) );
  }

  device_instance const& add_capacitor( std::string id, std::string_view plus, std::string_view minus, double farads )
  {
    device_instance d;
    d.id = std::move( id );
    d.kind = device_kind::cap;
    d.terminals = { std::string( plus ), std::string( minus ) };
    d.capacitance = farads;
    return add( std::move( d ) );
  }

  device_instance const& add_source( std::string id, std::string_view plus, std::string_view minus, pwl wave )
  {
    device_instance d;
    d.id = std::move( id );
    d.kind = device_kind::vsrc;
    d.terminals = { std::string( plus ), std::string( minus ) };
    d.source = std::move( wave );
    return add( std::move( d ) );
  }

  device_instance const* find( std::string_view id ) const
  {
    for ( auto const& d : devices_ )
      if ( d.id == id )
        return &d;
    return nullptr;
  }

  /* Mutable access for builders and tests that derive variants of a cell. */
  device_instance& device_at( std::size_t index ) { return devices_.at( index ); }

  void remove_devices( std::vector<std::string> const& ids )
  {
    std::erase_if( devices_, [&]( auto const& d ) { return std::find( ids.begin(), ids.end(), d.id ) != ids.end(); } );
  }

  std::size_t transistor_count() const
  {
    return static_cast<std::size_t>(
        std::count_if( devices_.begin(), devices_.end(), []( auto const& d ) { return is_transistor( d.kind ); } ) );
  }

  /*! \brief All nets in first-touch order (ports first, then device terminals). */
  std::vector<std::string> nets() const
  {
    std::vector<std::string> out;
    auto push = [&]( std::string const& n ) {
      if ( std::find( out.begin(), out.end(), n ) == out.end() )
        out.push_back( n );
    };
    for ( auto const& n : inputs_ )
      push( n );
    for ( auto const& n : outputs_ )
      push( n );
    for ( auto const& d : devices_ )
      for ( auto const& t : d.terminals )
        push( t );
    return out;
  }

  /*! \brief Appends all devices of `other`, prefixing their ids. Ports are not merged. */
  void merge( netlist const& other, std::string_view id_prefix = {} )
  {
    for ( auto d : other.devices() )
    {
      d.id = std::string( id_prefix ) + d.id;
      add( std::move( d ) );
    }
  }

private:
  static void add_port( std::vector<std::string>& ports, std::string_view net )
  {
    auto n = net_name( net );
    if ( std::find( ports.begin(), ports.end(), n ) == ports.end() )
      ports.push_back( std::move( n ) );
  }

  std::string name_;
  std::vector<device_instance> devices_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::optional<int> declared_count_;
};

namespace detail
{

inline bool close( double a, double b, double rel = 1e-9 )
{
  return a == b || std::abs( a - b ) <= rel * std::max( std::abs( a ), std::abs( b ) );
}

} // namespace detail

/*! \brief Structural equality: same name, ports, count and devices in order.
 *
 * Real-valued parameters compare to 1e-9 relative, which covers the twelve
 * significant digits written by the emitter.
 */
inline bool structurally_equal( netlist const& a, netlist const& b )
{
  if ( a.name() != b.name() || a.inputs() != b.inputs() || a.outputs() != b.outputs() ||
       a.declared_count() != b.declared_count() || a.devices().size() != b.devices().size() )
    return false;
  for ( std::size_t i = 0; i < a.devices().size(); ++i )
  {
    auto const& x = a.devices()[i];
    auto const& y = b.devices()[i];
    if ( x.id != y.id || x.kind != y.kind || x.terminals != y.terminals )
      return false;
    if ( is_cnfet( x.kind ) && ( x.chirality != y.chirality || x.tubes != y.tubes ) )
      return false;
    if ( ( x.kind == device_kind::nmos || x.kind == device_kind::pmos ) &&
         ( !detail::close( x.w, y.w ) || !detail::close( x.l, y.l ) ) )
      return false;
    if ( x.kind == device_kind::cap && !detail::close( x.capacitance, y.capacitance ) )
      return false;
    if ( x.kind == device_kind::vsrc )
    {
      if ( x.source.points.size() != y.source.points.size() )
        return false;
      for ( std::size_t k = 0; k < x.source.points.size(); ++k )
        if ( !detail::close( x.source.points[k].first, y.source.points[k].first ) ||
             !detail::close( x.source.points[k].second, y.source.points[k].second ) )
          return false;
    }
  }
  return true;
}

} // namespace cnfa
