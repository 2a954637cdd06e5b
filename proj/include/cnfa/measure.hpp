#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "netlist.hpp"
#include "params_file.hpp"
#include "simulator.hpp"
#include "switch_level.hpp"

namespace cnfa
{

/*! \brief An output never reached its new value within the half-period after a transition. */
class functional_failure : public simulation_error
{
public:
  using simulation_error::simulation_error;
};

struct operating_point
{
  double vdd = 0.65;
  double cload = 2.1e-15;   // F, on every output
  double frequency = 250e6; // Hz; each input state is held for half a period
  double temperature = 25.0;

  friend bool operator==( operating_point const&, operating_point const& ) = default;
};

struct measure_options
{
  double ramp = 1e-12;
  integration_method integration = integration_method::trapezoidal;
  double dt_max = 10e-12;
  double dv_target = 0.03;
};

/*! \brief Closed walk over all ordered pairs of distinct `width`-bit states.
 *
 * Starts and ends at state 0 and visits each of the 2^w (2^w - 1) directed
 * transitions exactly once (Hierholzer on the complete digraph).
 */
inline std::vector<unsigned> eulerian_sequence( unsigned width )
{
  if ( width == 0u || width > 8u )
    throw invalid_argument( "eulerian_sequence: width must be 1..8" );
  unsigned const n = 1u << width;
  std::vector<unsigned> next( n, 0u ); // next unused successor offset per vertex
  std::vector<unsigned> stack{ 0u }, circuit;
  while ( !stack.empty() )
  {
    unsigned const v = stack.back();
    if ( next[v] < n - 1u )
    {
      unsigned const offset = ++next[v];
      stack.push_back( ( v + offset ) % n );
    }
    else
    {
      circuit.push_back( v );
      stack.pop_back();
    }
  }
  std::reverse( circuit.begin(), circuit.end() );
  return circuit;
}

/*! \brief A cell wrapped with output loads and piecewise-linear input drivers. */
struct testbench
{
  netlist circuit;
  stimulus drive;
  std::vector<unsigned> sequence;
  double half_period = 0.0;
  double t_stop = 0.0;
};

inline testbench build_testbench( netlist const& cell, operating_point const& op, measure_options const& opts = {},
                                  std::optional<std::vector<unsigned>> sequence = std::nullopt )
{
  if ( !( op.vdd > 0.0 && op.cload > 0.0 && op.frequency > 0.0 ) )
    throw invalid_argument( "operating point values must be positive" );
  auto const width = static_cast<unsigned>( cell.inputs().size() );
  testbench tb;
  tb.circuit = cell;
  tb.sequence = sequence ? *sequence : eulerian_sequence( width );
  if ( tb.sequence.size() < 2u )
    throw invalid_argument( "pattern sequence needs at least one transition" );
  tb.half_period = 0.5 / op.frequency;
  if ( !( opts.ramp > 0.0 && opts.ramp < 0.5 * tb.half_period ) )
    throw invalid_argument( "input ramp must be shorter than half the state hold time" );
  tb.t_stop = static_cast<double>( tb.sequence.size() ) * tb.half_period;

  for ( auto const& o : cell.outputs() )
    tb.circuit.add_capacitor( "CL_" + o, o, gnd_net, op.cload );

  for ( unsigned i = 0; i < width; ++i )
  {
    auto bit = [&]( unsigned state ) { return ( ( state >> ( width - 1u - i ) ) & 1u ) ? op.vdd : 0.0; };
    pwl wave{ { { 0.0, bit( tb.sequence.front() ) } } };
    for ( std::size_t k = 1; k < tb.sequence.size(); ++k )
    {
      double const before = bit( tb.sequence[k - 1] ), after = bit( tb.sequence[k] );
      if ( before == after )
        continue;
      double const t = static_cast<double>( k ) * tb.half_period;
      wave.points.push_back( { t, before } );
      wave.points.push_back( { t + opts.ramp, after } );
    }
    tb.drive.push_back( { cell.inputs()[i], std::move( wave ) } );
  }
  return tb;
}

struct transition_delay
{
  unsigned from = 0;
  unsigned to = 0;
  std::string output;
  bool rising = false;
  double delay = 0.0;
};

/*! \brief Delay, power and PDP of one cell at one operating point.
 *
 * `power` averages the energy delivered by every source (rail and input
 * drivers) over the whole periods that contain the transitions;
 * `supply_power` counts the vdd rail alone.
 */
struct measurement
{
  double delay = 0.0;
  double power = 0.0;
  double supply_power = 0.0;
  double pdp = 0.0;
  std::vector<transition_delay> transitions;
  std::size_t worst = 0;
  residual_table residuals;
  double max_kcl_residual = 0.0;
  std::size_t steps = 0;
};

namespace detail
{

inline std::map<std::string, double> static_guess( netlist const& cell, unsigned state, double vdd )
{
  std::map<std::string, double> guess;
  try
  {
    switch_options so;
    so.vdd = vdd;
    auto const r = evaluate_static( cell, pattern_bits( state, cell.inputs().size() ), so );
    for ( auto const& [net, v] : r.nodes )
    {
      switch ( v.level )
      {
      case switch_level::strong0: guess[net] = 0.0; break;
      case switch_level::strong1: guess[net] = vdd; break;
      case switch_level::weak0: guess[net] = v.drop; break;
      case switch_level::weak1: guess[net] = vdd - v.drop; break;
      default: guess[net] = 0.5 * vdd; break;
      }
    }
  }
  catch ( error const& )
  {
  }
  return guess;
}

/* Time of the last 50% crossing toward `rising` inside [t0, t1]; empty when the
   output does not end the window on the new side. */
inline std::optional<double> last_crossing( waveform const& w, std::vector<double> const& v, double t0, double t1,
                                            double threshold, bool rising )
{
  auto const first = static_cast<std::size_t>( std::lower_bound( w.time.begin(), w.time.end(), t0 ) - w.time.begin() );
  auto last = static_cast<std::size_t>( std::upper_bound( w.time.begin(), w.time.end(), t1 ) - w.time.begin() );
  if ( last == 0u || first >= last )
    return std::nullopt;
  --last;
  bool const ends_right = rising ? v[last] > threshold : v[last] < threshold;
  if ( !ends_right )
    return std::nullopt;
  std::optional<double> t;
  for ( std::size_t k = std::max<std::size_t>( first, 1u ); k <= last; ++k )
  {
    bool const crossed = rising ? ( v[k - 1] <= threshold && v[k] > threshold ) : ( v[k - 1] >= threshold && v[k] < threshold );
    if ( crossed )
      t = w.time[k - 1] + ( threshold - v[k - 1] ) * ( w.time[k] - w.time[k - 1] ) / ( v[k] - v[k - 1] );
  }
  if ( !t && ( rising ? v[first] > threshold : v[first] < threshold ) )
    t = w.time[first];
  return t;
}

} // namespace detail

/*! \brief Simulates the testbench and reduces the waveform to a measurement. */
inline measurement measure( netlist const& cell, operating_point const& op, model_set const& models = {},
                            measure_options const& opts = {}, std::optional<std::vector<unsigned>> sequence = std::nullopt )
{
  auto const tb = build_testbench( cell, op, opts, std::move( sequence ) );
  auto const width = cell.inputs().size();

  sim_config cfg;
  cfg.vdd = op.vdd;
  cfg.temperature = op.temperature;
  cfg.t_stop = tb.t_stop;
  cfg.dt_max = std::min( opts.dt_max, tb.half_period / 20.0 );
  cfg.dt_init = std::min( opts.ramp / 20.0, cfg.dt_max );
  cfg.dt_min = cfg.dt_init * 1e-6;
  cfg.integration = opts.integration;
  cfg.dv_target = opts.dv_target;

  circuit sim( tb.circuit, cfg, models, tb.drive );
  auto const guess = detail::static_guess( cell, tb.sequence.front(), op.vdd );
  auto const w = sim.transient( cell.outputs(), &guess );

  measurement m;
  m.max_kcl_residual = w.max_kcl_residual;
  m.steps = w.time.size();
  double const threshold = 0.5 * op.vdd;
  for ( auto const& out : cell.outputs() )
  {
    auto const& v = w.net( out );
    for ( std::size_t k = 0; k < tb.sequence.size(); ++k )
    {
      auto const state = tb.sequence[k];
      auto const bits = pattern_bits( state, width );
      auto const want = expected_output( out, bits );
      double const t_end = std::min( static_cast<double>( k + 1 ) * tb.half_period, tb.t_stop );
      double const value = w.at( out, t_end );
      double const rail = want ? ( *want ? op.vdd : 0.0 ) : ( value > threshold ? op.vdd : 0.0 );
      auto& residual = m.residuals[{ state, out }];
      residual = std::max( residual, std::abs( value - rail ) );

      if ( k == 0u )
        continue;
      auto const before = expected_output( out, pattern_bits( tb.sequence[k - 1], width ) );
      if ( !want || !before || *want == *before )
        continue;
      double const t_start = static_cast<double>( k ) * tb.half_period;
      auto const crossing = detail::last_crossing( w, v, t_start, t_end, threshold, *want );
      if ( !crossing )
        throw functional_failure( "output " + out + " never crosses 50% after transition " +
                                  pattern_string( pattern_bits( tb.sequence[k - 1], width ) ) + " -> " +
                                  pattern_string( bits ) );
      double const t_in = t_start + 0.5 * opts.ramp;
      m.transitions.push_back( { tb.sequence[k - 1], state, out, *want, std::max( 0.0, *crossing - t_in ) } );
    }
  }
  if ( m.transitions.empty() )
    throw functional_failure( "no output transition in the pattern sequence" );
  for ( std::size_t i = 0; i < m.transitions.size(); ++i )
    if ( m.transitions[i].delay > m.transitions[m.worst].delay )
      m.worst = i;
  m.delay = m.transitions[m.worst].delay;

  double const t0 = tb.half_period;
  double const span = tb.t_stop - t0;
  std::vector<std::size_t> all( w.sources.size() );
  std::iota( all.begin(), all.end(), 0u );
  m.power = w.energy( all, t0, tb.t_stop ) / span;
  auto const rail = std::find( w.sources.begin(), w.sources.end(), "vdd" );
  if ( rail != w.sources.end() )
    m.supply_power = w.energy( { static_cast<std::size_t>( rail - w.sources.begin() ) }, t0, tb.t_stop ) / span;
  m.pdp = m.delay * m.power;
  return m;
}

} // namespace cnfa
