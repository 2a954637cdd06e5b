#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <future>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "cells.hpp"
#include "error.hpp"
#include "measure.hpp"
#include "params_file.hpp"
#include "reference_table.hpp"
#include "units.hpp"

namespace cnfa
{

/*! \brief Cartesian sweep over cells and operating-point axes (SI units). */
struct sweep_plan
{
  std::vector<std::string> cells;
  std::vector<double> vdd{ 0.65 };
  std::vector<double> cload{ reference_cload };
  std::vector<double> frequency{ reference_frequency };
  std::vector<double> temperature{ reference_temperature };
  chirality_vector policy{ 55u, 0u };
  std::string output;

  std::size_t points() const noexcept
  {
    return cells.size() * vdd.size() * cload.size() * frequency.size() * temperature.size();
  }

  void validate() const
  {
    if ( cells.empty() || vdd.empty() || cload.empty() || frequency.empty() || temperature.empty() )
      throw invalid_argument( "sweep plan: every list must be nonempty" );
    auto positive = []( std::vector<double> const& v, char const* what ) {
      for ( double x : v )
        if ( !( x > 0.0 ) || !std::isfinite( x ) )
          throw invalid_argument( std::string( "sweep plan: " ) + what + " values must be positive" );
    };
    positive( vdd, "vdd" );
    positive( cload, "cload" );
    positive( frequency, "frequency" );
    for ( double t : temperature )
      if ( !( t >= -40.0 && t <= 125.0 ) )
        throw invalid_argument( "sweep plan: temperatures must lie in [-40, 125] C" );
    if ( !is_semiconducting( policy ) )
      throw invalid_argument( "sweep plan: policy chirality " + policy.to_string() + " is metallic" );
  }

  /*! \brief The published comparison points: nine designs at three supplies. */
  static sweep_plan table2()
  {
    sweep_plan p;
    p.cells = reference_designs();
    p.vdd = { 0.5, 0.65, 0.8 };
    return p;
  }
};

inline std::vector<double> default_cload_grid()
{
  std::vector<double> v;
  for ( int i = 0; i < 8; ++i )
    v.push_back( ( 1.4 + 0.5 * i ) * 1e-15 );
  return v;
}

inline std::vector<double> default_frequency_grid() { return { 100e6, 250e6, 500e6, 1000e6 }; }
inline std::vector<double> default_temperature_grid() { return { 0.0, 25.0, 50.0, 70.0 }; }
inline std::vector<double> default_vdd_grid() { return { 0.5, 0.65, 0.8 }; }

/*! \brief Cell names accepted by the harness: every built-in cell and every reference-table design. */
inline bool known_design( std::string const& name )
{
  if ( find_cell( name ) )
    return true;
  auto const key = normalized_cell_key( name );
  for ( auto const& d : reference_designs() )
    if ( normalized_cell_key( d ) == key )
      return true;
  return false;
}

namespace detail
{

/* A plain number takes the axis' customary unit (`default_scale`); anything
   with a suffix goes through parse_quantity. `a:step:b` expands to a grid. */
inline std::vector<double> parse_axis( std::string const& text, double default_scale, std::size_t line )
{
  auto one = [&]( std::string const& item ) {
    double v = 0.0;
    auto const* b = item.data();
    auto const* e = item.data() + item.size();
    auto const [p, ec] = std::from_chars( b, e, v );
    try
    {
      if ( ec == std::errc{} && p == e )
        return v * default_scale;
      return parse_quantity( item );
    }
    catch ( invalid_argument const& err )
    {
      throw parse_error( line, 1, err.what() );
    }
  };
  std::vector<double> out;
  for ( auto const& item : split( text, ',' ) )
  {
    if ( item.empty() )
      throw parse_error( line, 1, "empty list element" );
    auto const parts = split( item, ':' );
    if ( parts.size() == 1u )
      out.push_back( one( item ) );
    else if ( parts.size() == 3u )
    {
      double const a = one( parts[0] ), step = one( parts[1] ), b = one( parts[2] );
      if ( !( step > 0.0 ) || b < a )
        throw parse_error( line, 1, "range needs start <= stop and a positive step" );
      auto const count = static_cast<std::size_t>( std::floor( ( b - a ) / step + 1e-9 ) ) + 1u;
      if ( count > 10000u )
        throw parse_error( line, 1, "range too long" );
      for ( std::size_t i = 0; i < count; ++i )
        out.push_back( a + step * static_cast<double>( i ) );
    }
    else
      throw parse_error( line, 1, "malformed range '" + item + "'", "start:step:stop" );
  }
  return out;
}

inline chirality_vector parse_policy( std::string text, std::size_t line )
{
  std::erase_if( text, []( char c ) { return c == '(' || c == ')' || c == ' '; } );
  auto const parts = split( text, ',' );
  if ( parts.size() != 2u )
    throw parse_error( line, 1, "policy must be two integers", "n1,n2" );
  std::uint32_t n[2] = {};
  for ( int i = 0; i < 2; ++i )
  {
    auto const& s = parts[static_cast<std::size_t>( i )];
    auto const [p, ec] = std::from_chars( s.data(), s.data() + s.size(), n[i] );
    if ( ec != std::errc{} || p != s.data() + s.size() )
      throw parse_error( line, 1, "policy must be two integers", "n1,n2" );
  }
  try
  {
    return chirality_vector( n[0], n[1] );
  }
  catch ( invalid_argument const& e )
  {
    throw parse_error( line, 1, e.what() );
  }
}

} // namespace detail

inline chirality_vector parse_policy( std::string const& text )
{
  return detail::parse_policy( text, 0 );
}

/*! \brief Reads a sweep plan from the key = value format.
 *
 * Keys: `cells` (names), `vdd` (V), `cload` (fF), `freq` (MHz), `temp` (C),
 * `policy` (n1,n2), `out` (path). Plain numbers use the unit in parentheses;
 * suffixed values such as `2.1fF` or `0.25GHz` are also accepted. Unset axes
 * keep the reference operating point.
 */
inline sweep_plan parse_sweep_plan( std::string_view text )
{
  sweep_plan p;
  for ( auto const& kv : parse_key_values( text ) )
  {
    if ( kv.key == "cells" )
    {
      p.cells.clear();
      for ( auto const& c : detail::split( kv.value, ',' ) )
      {
        if ( !known_design( c ) )
          throw parse_error( kv.line, 1, "unknown cell '" + c + "'" );
        p.cells.push_back( c );
      }
    }
    else if ( kv.key == "vdd" )
      p.vdd = detail::parse_axis( kv.value, 1.0, kv.line );
    else if ( kv.key == "cload" )
      p.cload = detail::parse_axis( kv.value, 1e-15, kv.line );
    else if ( kv.key == "freq" )
      p.frequency = detail::parse_axis( kv.value, 1e6, kv.line );
    else if ( kv.key == "temp" )
      p.temperature = detail::parse_axis( kv.value, 1.0, kv.line );
    else if ( kv.key == "policy" )
      p.policy = detail::parse_policy( kv.value, kv.line );
    else if ( kv.key == "out" )
      p.output = kv.value;
    else
      throw parse_error( kv.line, 1, "unknown plan key '" + kv.key + "'", "cells, vdd, cload, freq, temp, policy, out" );
  }
  try
  {
    p.validate();
  }
  catch ( invalid_argument const& e )
  {
    throw parse_error( 0, 0, e.what() );
  }
  return p;
}

struct sweep_options
{
  unsigned threads = 0; // 0: hardware concurrency
  measure_options measure;
  model_set models;
};

inline bool record_order( characterization_record const& a, characterization_record const& b )
{
  return std::tie( a.cell, a.vdd, a.cload, a.frequency, a.temperature ) <
         std::tie( b.cell, b.vdd, b.cload, b.frequency, b.temperature );
}

/*! \brief Characterizes one built-in cell at one point; failures become failure rows. */
inline characterization_record characterize( cell_name name, operating_point const& op, chirality_vector policy,
                                             sweep_options const& opts = {} )
{
  characterization_record r;
  r.cell = std::string( spec_of( name ).label );
  r.vdd = op.vdd;
  r.cload = op.cload;
  r.frequency = op.frequency;
  r.temperature = op.temperature;
  try
  {
    auto const n = build_cell( name, diameter_policy::uniform( policy ), opts.models.mos );
    auto const m = measure( n, op, opts.models, opts.measure );
    r.delay = m.delay;
    r.power = m.power;
    r.pdp = m.pdp;
  }
  catch ( std::exception const& e )
  {
    r.status = "failed";
    r.reason = e.what();
  }
  return r;
}

/*! \brief Runs the full Cartesian product of a plan.
 *
 * Points run concurrently, each with its own simulator. Designs without a
 * netlist yield `unavailable` rows carrying the published values where the
 * point matches the reference table. The result is sorted by (cell, vdd, cload,
 * frequency, temperature).
 */
inline std::vector<characterization_record> run_sweep( sweep_plan const& plan, sweep_options const& opts = {} )
{
  plan.validate();
  struct task
  {
    std::optional<cell_name> cell;
    std::string label;
    operating_point op;
  };
  std::vector<task> tasks;
  for ( auto const& name : plan.cells )
  {
    if ( !known_design( name ) )
      throw invalid_argument( "unknown cell '" + name + "'" );
    auto const cell = find_cell( name );
    std::string label = cell ? std::string( spec_of( *cell ).label ) : name;
    if ( !cell )
      for ( auto const& d : reference_designs() )
        if ( normalized_cell_key( d ) == normalized_cell_key( name ) )
          label = d;
    for ( double v : plan.vdd )
      for ( double c : plan.cload )
        for ( double f : plan.frequency )
          for ( double t : plan.temperature )
            tasks.push_back( { cell, label, { v, c, f, t } } );
  }

  std::vector<characterization_record> records( tasks.size() );
  auto run = [&]( std::size_t i ) {
    auto const& t = tasks[i];
    if ( t.cell )
    {
      records[i] = characterize( *t.cell, t.op, plan.policy, opts );
      return;
    }
    auto& r = records[i];
    r.cell = t.label;
    r.vdd = t.op.vdd;
    r.cload = t.op.cload;
    r.frequency = t.op.frequency;
    r.temperature = t.op.temperature;
    r.source = record_source::reference;
    r.status = "unavailable";
    r.reason = "no netlist; reference data only";
    if ( std::abs( t.op.cload - reference_cload ) < 1e-21 && std::abs( t.op.frequency - reference_frequency ) < 1e-3 &&
         t.op.temperature == reference_temperature )
      if ( auto ref = find_reference( t.label, t.op.vdd ) )
      {
        r.delay = ref->delay;
        r.power = ref->power;
        r.pdp = ref->pdp;
      }
  };

  unsigned workers = opts.threads ? opts.threads : std::max( 1u, std::thread::hardware_concurrency() );
  workers = static_cast<unsigned>( std::min<std::size_t>( workers, tasks.size() ) );
  if ( workers <= 1u )
    for ( std::size_t i = 0; i < tasks.size(); ++i )
      run( i );
  else
  {
    std::atomic<std::size_t> next{ 0 };
    std::vector<std::future<void>> pool;
    for ( unsigned w = 0; w < workers; ++w )
      pool.push_back( std::async( std::launch::async, [&] {
        for ( std::size_t i = next++; i < tasks.size(); i = next++ )
          run( i );
      } ) );
    for ( auto& f : pool )
      f.get();
  }
  std::stable_sort( records.begin(), records.end(), record_order );
  return records;
}

} // namespace cnfa
