#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "device_physics.hpp"
#include "netlist.hpp"

namespace cnfa
{

enum class severity
{
  warning,
  error
};

struct diagnostic
{
  enum severity severity = severity::error;
  std::string code;    // dangling_net, missing_rail, count_mismatch, floating_gate, invalid_parameter, unconnected_port, source_short
  std::string subject; // net or device id
  std::string message;

  friend bool operator==( diagnostic const&, diagnostic const& ) = default;
};

struct validation_report
{
  std::vector<diagnostic> items;

  bool clean() const noexcept { return items.empty(); }
  bool has_errors() const
  {
    return std::any_of( items.begin(), items.end(), []( auto const& d ) { return d.severity == severity::error; } );
  }
  bool has( std::string_view code ) const
  {
    return std::any_of( items.begin(), items.end(), [&]( auto const& d ) { return d.code == code; } );
  }

  friend bool operator==( validation_report const&, validation_report const& ) = default;
};

/*! \brief Static structural checks on a netlist; never throws on malformed content. */
inline validation_report validate_netlist( netlist const& n )
{
  validation_report report;
  auto add = [&]( enum severity s, std::string code, std::string subject, std::string message ) {
    report.items.push_back( { s, std::move( code ), std::move( subject ), std::move( message ) } );
  };

  std::map<std::string, int> touches;
  std::map<std::string, bool> driven;
  for ( auto const& d : n.devices() )
  {
    for ( std::size_t t = 0; t < d.terminals.size(); ++t )
    {
      ++touches[d.terminals[t]];
      bool const is_gate = is_transistor( d.kind ) && t == 1u;
      if ( !is_gate && d.kind != device_kind::cap )
        driven[d.terminals[t]] = true;
    }

    switch ( d.kind )
    {
    case device_kind::cap:
      if ( !( d.capacitance > 0.0 ) || !std::isfinite( d.capacitance ) )
        add( severity::error, "invalid_parameter", d.id, "capacitance must be positive" );
      break;
    case device_kind::ncnfet:
    case device_kind::pcnfet:
      if ( !is_semiconducting( d.chirality ) )
        add( severity::error, "invalid_parameter", d.id, "chirality " + d.chirality.to_string() + " is metallic" );
      if ( d.tubes < 0 )
        add( severity::error, "invalid_parameter", d.id, "tube count must be positive" );
      break;
    case device_kind::nmos:
    case device_kind::pmos:
      if ( d.w < 0.0 || d.l < 0.0 || !std::isfinite( d.w ) || !std::isfinite( d.l ) )
        add( severity::error, "invalid_parameter", d.id, "transistor dimensions must be positive" );
      break;
    case device_kind::vsrc:
      if ( d.source.points.empty() )
        add( severity::error, "invalid_parameter", d.id, "source has no waveform" );
      for ( std::size_t k = 1; k < d.source.points.size(); ++k )
        if ( !( d.source.points[k].first > d.source.points[k - 1].first ) )
        {
          add( severity::error, "invalid_parameter", d.id, "pwl times must increase" );
          break;
        }
      if ( d.terminals[0] == d.terminals[1] )
        add( severity::error, "source_short", d.id, "source terminals are the same net" );
      break;
    }
  }

  auto const is_port = [&]( std::string const& net ) {
    return std::find( n.inputs().begin(), n.inputs().end(), net ) != n.inputs().end() ||
           std::find( n.outputs().begin(), n.outputs().end(), net ) != n.outputs().end();
  };
  auto const is_rail = []( std::string const& net ) { return net == vdd_net || net == gnd_net; };

  for ( auto const& [net, count] : touches )
    if ( count == 1 && !is_port( net ) && !is_rail( net ) )
      add( severity::error, "dangling_net", net, "net is touched by a single terminal" );

  for ( auto const& d : n.devices() )
  {
    if ( !is_transistor( d.kind ) )
      continue;
    auto const& g = d.gate();
    if ( !is_port( g ) && !is_rail( g ) && !driven[g] )
    {
      bool const already = std::any_of( report.items.begin(), report.items.end(),
                                        [&]( auto const& x ) { return x.code == "floating_gate" && x.subject == g; } );
      if ( !already )
        add( severity::error, "floating_gate", g, "gate net has no driver" );
    }
  }

  auto const transistors = n.transistor_count();
  if ( transistors > 0u && touches.count( std::string( vdd_net ) ) == 0u && touches.count( std::string( gnd_net ) ) == 0u )
    add( severity::error, "missing_rail", "", "transistors present but neither vdd nor gnd is connected" );

  for ( auto const* ports : { &n.inputs(), &n.outputs() } )
    for ( auto const& p : *ports )
      if ( touches.count( p ) == 0u )
        add( severity::error, "unconnected_port", p, "port is not connected to any device" );

  if ( n.declared_count() && static_cast<std::size_t>( *n.declared_count() ) != transistors )
    add( severity::error, "count_mismatch", n.name(),
         "declared " + std::to_string( *n.declared_count() ) + " transistors, found " + std::to_string( transistors ) );

  return report;
}

} // namespace cnfa
