#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "device_physics.hpp"
#include "error.hpp"
#include "netlist.hpp"

namespace cnfa
{

enum class switch_level
{
  strong0,
  weak0,
  strong1,
  weak1,
  z,
  x
};

/*! \brief Element of the static strength lattice.
 *
 * `drop` is the distance from the rail for weak levels and zero otherwise.
 */
struct switch_value
{
  switch_level level = switch_level::z;
  double drop = 0.0;

  static switch_value strong( bool v ) { return { v ? switch_level::strong1 : switch_level::strong0, 0.0 }; }
  static switch_value weak( bool v, double d ) { return { v ? switch_level::weak1 : switch_level::weak0, d }; }
  static switch_value z() { return {}; }
  static switch_value x() { return { switch_level::x, 0.0 }; }

  bool is_strong() const noexcept { return level == switch_level::strong0 || level == switch_level::strong1; }
  bool is_weak() const noexcept { return level == switch_level::weak0 || level == switch_level::weak1; }
  bool is_defined() const noexcept { return is_strong() || is_weak(); }

  /*! \brief Logic value ignoring strength; empty for Z and X. */
  std::optional<bool> logic() const noexcept
  {
    if ( !is_defined() )
      return std::nullopt;
    return level == switch_level::strong1 || level == switch_level::weak1;
  }

  std::string to_string() const
  {
    switch ( level )
    {
    case switch_level::strong0: return "S0";
    case switch_level::strong1: return "S1";
    case switch_level::z: return "Z";
    case switch_level::x: return "X";
    default: break;
    }
    char buf[48];
    std::snprintf( buf, sizeof buf, "%s(%.4f)", level == switch_level::weak0 ? "W0" : "W1", drop );
    return buf;
  }

  friend bool operator==( switch_value const&, switch_value const& ) = default;
};

/*! \brief Least upper bound of two driver contributions.
 *
 * Z is the identity and X absorbs. Equal logic values keep the stronger
 * contribution (smaller drop among weak ones). Different logic values
 * conflict and give X, whatever their strengths.
 */
inline switch_value join( switch_value const& a, switch_value const& b )
{
  if ( a.level == switch_level::z )
    return b;
  if ( b.level == switch_level::z )
    return a;
  if ( a.level == switch_level::x || b.level == switch_level::x )
    return switch_value::x();
  if ( *a.logic() != *b.logic() )
    return switch_value::x();
  if ( a.is_strong() )
    return a;
  if ( b.is_strong() )
    return b;
  return a.drop <= b.drop ? a : b;
}

/*! \brief Value seen on the far side of a conducting device.
 *
 * An N device degrades a passed 1 to at least `vth`; a P device does the
 * same to a passed 0. Drops along a chain combine by maximum.
 */
inline switch_value transmit( switch_value const& v, enum polarity pol, double vth )
{
  if ( !v.is_defined() )
    return v;
  bool const one = *v.logic();
  if ( pol == polarity::n && one )
    return switch_value::weak( true, std::max( v.drop, vth ) );
  if ( pol == polarity::p && !one )
    return switch_value::weak( false, std::max( v.drop, vth ) );
  return v;
}

/*! \brief Thrown when the gate/channel iteration does not reach a fixed point. */
class oscillation_error : public error
{
public:
  oscillation_error( std::vector<std::string> nets )
      : error( "switch-level evaluation did not converge; oscillating nets: " + join_names( nets ) ),
        nets_( std::move( nets ) )
  {
  }

  std::vector<std::string> const& nets() const noexcept { return nets_; }

private:
  static std::string join_names( std::vector<std::string> const& nets )
  {
    std::string s;
    for ( auto const& n : nets )
      s += ( s.empty() ? "" : " " ) + n;
    return s;
  }

  std::vector<std::string> nets_;
};

struct switch_options
{
  double vdd = 0.65;
  double epsilon = 0.2;
  mos_model_params mos;
};

/*! \brief A weak output of one pattern.
 *
 * `device` introduced the largest drop on the path; `contested_by` names an
 * off device leaking toward the opposite rail, if any.
 */
struct weak_output
{
  std::string net;
  switch_value value;
  std::string device;
  std::string contested_by;
};

struct pattern_report
{
  std::vector<bool> pattern;
  std::map<std::string, switch_value> nodes;
  std::map<std::string, bool> correct;
  std::vector<weak_output> weak;

  bool all_correct() const
  {
    return std::all_of( correct.begin(), correct.end(), []( auto const& kv ) { return kv.second; } );
  }
};

/*! \brief Pattern index to bits; the first input is the most significant bit. */
inline std::vector<bool> pattern_bits( unsigned index, std::size_t width )
{
  std::vector<bool> bits( width );
  for ( std::size_t i = 0; i < width; ++i )
    bits[i] = ( index >> ( width - 1u - i ) ) & 1u;
  return bits;
}

inline unsigned pattern_index( std::vector<bool> const& bits )
{
  unsigned v = 0u;
  for ( bool b : bits )
    v = ( v << 1u ) | ( b ? 1u : 0u );
  return v;
}

inline std::string pattern_string( std::vector<bool> const& bits )
{
  std::string s;
  for ( bool b : bits )
    s.push_back( b ? '1' : '0' );
  return s;
}

/*! \brief Expected value of an output, chosen by its name.
 *
 * `sum` and `out` are the parity of all inputs; `cout` is the majority of
 * three inputs. Other names have no oracle.
 */
inline std::optional<bool> expected_output( std::string const& name, std::vector<bool> const& inputs )
{
  if ( name == "sum" || name == "out" )
    return std::accumulate( inputs.begin(), inputs.end(), false, []( bool a, bool b ) { return a != b; } );
  if ( name == "cout" && inputs.size() == 3u )
    return ( inputs[0] && inputs[1] ) || ( inputs[2] && ( inputs[0] != inputs[1] ) );
  return std::nullopt;
}

namespace detail
{

enum class switch_state
{
  off,
  on,
  unknown
};

class switch_network
{
public:
  switch_network( netlist const& n, switch_options const& opts ) : n_( n ), opts_( opts )
  {
    index( std::string( vdd_net ) );
    index( std::string( gnd_net ) );
    for ( auto const& net : n.nets() )
      index( net );
    for ( std::size_t i = 0; i < n.devices().size(); ++i )
    {
      auto const& d = n.devices()[i];
      if ( !is_transistor( d.kind ) )
        continue;
      sw s;
      s.device = i;
      s.a = names_.at( d.drain() );
      s.g = names_.at( d.gate() );
      s.b = names_.at( d.source_net() );
      s.pol = polarity_of( d.kind );
      if ( is_cnfet( d.kind ) )
        s.vth = is_semiconducting( d.chirality ) ? threshold_voltage( cnt_diameter( d.chirality ) ) : 0.0;
      else
        s.vth = opts.mos.vth;
      switches_.push_back( s );
    }
    adj_.resize( nets_.size() );
    for ( std::size_t k = 0; k < switches_.size(); ++k )
    {
      adj_[switches_[k].a].push_back( { k, switches_[k].b } );
      adj_[switches_[k].b].push_back( { k, switches_[k].a } );
    }
  }

  pattern_report evaluate( std::vector<bool> const& pattern )
  {
    if ( pattern.size() != n_.inputs().size() )
      throw invalid_argument( "pattern width does not match the input ports" );
    fixed_.assign( nets_.size(), std::nullopt );
    fixed_[names_.at( std::string( vdd_net ) )] = switch_value::strong( true );
    fixed_[names_.at( std::string( gnd_net ) )] = switch_value::strong( false );
    for ( std::size_t i = 0; i < pattern.size(); ++i )
      fixed_[names_.at( n_.inputs()[i] )] = switch_value::strong( pattern[i] );

    std::vector<switch_value> values( nets_.size() );
    apply_fixed( values );
    std::size_t const bound = std::max<std::size_t>( 4u * switches_.size(), 4u );
    bool converged = false;
    std::vector<switch_value> previous;
    for ( std::size_t sweep = 0; sweep < bound; ++sweep )
    {
      compute_states( values );
      auto next = fixed_point();
      if ( next == values )
      {
        converged = true;
        break;
      }
      previous = std::move( values );
      values = std::move( next );
    }
    if ( !converged )
    {
      std::vector<std::string> nets;
      for ( std::size_t i = 0; i < nets_.size(); ++i )
        if ( !( previous.size() == values.size() && previous[i] == values[i] ) )
          nets.push_back( nets_[i] );
      throw oscillation_error( std::move( nets ) );
    }

    pattern_report r;
    r.pattern = pattern;
    for ( std::size_t i = 0; i < nets_.size(); ++i )
      r.nodes.emplace( nets_[i], values[i] );
    auto const contests = find_contests( values );
    for ( auto const& o : n_.outputs() )
    {
      auto const idx = names_.at( o );
      auto const& v = values[idx];
      auto const want = expected_output( o, pattern );
      r.correct[o] = want ? ( v.logic() && *v.logic() == *want ) : v.is_defined();
      if ( v.is_weak() )
      {
        weak_output w{ o, v, limiting_device( values, idx ), {} };
        if ( auto it = contests.find( idx ); it != contests.end() )
          w.contested_by = n_.devices()[switches_[it->second].device].id;
        r.weak.push_back( std::move( w ) );
      }
    }
    return r;
  }

private:
  struct sw
  {
    std::size_t device = 0;
    std::size_t a = 0, g = 0, b = 0;
    enum polarity pol = polarity::n;
    double vth = 0.0;
  };

  struct edge
  {
    std::size_t sw;
    std::size_t other;
  };

  void index( std::string const& net )
  {
    if ( names_.emplace( net, nets_.size() ).second )
      nets_.push_back( net );
  }

  void apply_fixed( std::vector<switch_value>& values ) const
  {
    for ( std::size_t i = 0; i < values.size(); ++i )
      if ( fixed_[i] )
        values[i] = *fixed_[i];
  }

  void compute_states( std::vector<switch_value> const& values )
  {
    states_.assign( switches_.size(), switch_state::off );
    for ( std::size_t k = 0; k < switches_.size(); ++k )
    {
      auto const& g = values[switches_[k].g];
      if ( g.level == switch_level::x )
        states_[k] = switch_state::unknown;
      else if ( g.is_defined() )
        states_[k] = ( *g.logic() == ( switches_[k].pol == polarity::n ) ) ? switch_state::on : switch_state::off;
    }
  }

  switch_value through( std::size_t k, switch_value const& v ) const
  {
    if ( states_[k] == switch_state::off )
      return switch_value::z();
    if ( states_[k] == switch_state::unknown )
      return v.level == switch_level::z ? v : switch_value::x();
    return transmit( v, switches_[k].pol, switches_[k].vth );
  }

  /* Least fixed point of channel propagation for the current switch states. */
  std::vector<switch_value> fixed_point() const
  {
    std::vector<switch_value> values( nets_.size() );
    apply_fixed( values );
    bool changed = true;
    while ( changed )
    {
      changed = false;
      for ( std::size_t i = 0; i < nets_.size(); ++i )
      {
        if ( fixed_[i] )
          continue;
        switch_value v;
        for ( auto const& e : adj_[i] )
          v = join( v, through( e.sw, values[e.other] ) );
        if ( !( v == values[i] ) )
        {
          values[i] = v;
          changed = true;
        }
      }
    }
    return values;
  }

  /* Walks back along the driving path to the device that introduced the drop. */
  std::string limiting_device( std::vector<switch_value> const& values, std::size_t net ) const
  {
    std::set<std::size_t> seen;
    while ( seen.insert( net ).second )
    {
      auto const& v = values[net];
      std::optional<edge> carrier;
      for ( auto const& e : adj_[net] )
        if ( states_[e.sw] == switch_state::on && through( e.sw, values[e.other] ) == v )
        {
          carrier = e;
          break;
        }
      if ( !carrier )
        return {};
      auto const& from = values[carrier->other];
      if ( from.is_strong() || from.drop < v.drop )
        return n_.devices()[switches_[carrier->sw].device].id;
      net = carrier->other;
    }
    return {};
  }

  double estimated_voltage( switch_value const& v ) const
  {
    switch ( v.level )
    {
    case switch_level::strong0: return 0.0;
    case switch_level::strong1: return opts_.vdd;
    case switch_level::weak0: return v.drop;
    case switch_level::weak1: return opts_.vdd - v.drop;
    default: return std::nan( "" );
    }
  }

  /* Weak-held groups that an off device couples to the opposite rail.
     The leak counts when its gate sits no further than half a threshold
     below turn-on. An off device sharing its gate net with a device that
     holds the group is exempt: the pair switches together. */
  std::map<std::size_t, std::size_t> find_contests( std::vector<switch_value> const& values ) const
  {
    std::vector<std::size_t> parent( nets_.size() );
    std::iota( parent.begin(), parent.end(), 0u );
    std::function<std::size_t( std::size_t )> root = [&]( std::size_t i ) {
      return parent[i] == i ? i : parent[i] = root( parent[i] );
    };
    auto weak_net = [&]( std::size_t i ) { return !fixed_[i] && values[i].is_weak(); };
    for ( std::size_t k = 0; k < switches_.size(); ++k )
    {
      auto const& s = switches_[k];
      if ( states_[k] == switch_state::on && weak_net( s.a ) && weak_net( s.b ) )
        parent[root( s.a )] = root( s.b );
    }

    std::map<std::size_t, std::set<std::size_t>> holding_gates;
    for ( std::size_t k = 0; k < switches_.size(); ++k )
    {
      auto const& s = switches_[k];
      if ( states_[k] != switch_state::on )
        continue;
      for ( auto t : { s.a, s.b } )
        if ( weak_net( t ) )
          holding_gates[root( t )].insert( s.g );
    }

    std::map<std::size_t, std::size_t> group_contest;
    for ( std::size_t k = 0; k < switches_.size(); ++k )
    {
      auto const& s = switches_[k];
      if ( states_[k] != switch_state::off )
        continue;
      for ( auto [in, out] : { std::pair{ s.a, s.b }, std::pair{ s.b, s.a } } )
      {
        if ( !weak_net( in ) || !values[out].is_strong() || *values[out].logic() == *values[in].logic() )
          continue;
        double const vg = estimated_voltage( values[s.g] );
        if ( std::isnan( vg ) )
          continue;
        double const v1 = estimated_voltage( values[in] );
        double const v2 = estimated_voltage( values[out] );
        double const overdrive = s.pol == polarity::n ? vg - std::min( v1, v2 ) : std::max( v1, v2 ) - vg;
        if ( overdrive < -0.5 * s.vth )
          continue;
        auto const grp = root( in );
        if ( holding_gates[grp].count( s.g ) )
          continue;
        group_contest.emplace( grp, k );
      }
    }

    std::map<std::size_t, std::size_t> by_net;
    for ( std::size_t i = 0; i < nets_.size(); ++i )
      if ( weak_net( i ) )
        if ( auto it = group_contest.find( root( i ) ); it != group_contest.end() )
          by_net.emplace( i, it->second );
    return by_net;
  }

  netlist const& n_;
  switch_options opts_;
  std::vector<std::string> nets_;
  std::map<std::string, std::size_t> names_;
  std::vector<sw> switches_;
  std::vector<std::vector<edge>> adj_;
  std::vector<std::optional<switch_value>> fixed_;
  std::vector<switch_state> states_;
};

} // namespace detail

/*! \brief Static switch-level evaluation of one input pattern (bits in input-port order). */
inline pattern_report evaluate_static( netlist const& n, std::vector<bool> const& pattern, switch_options const& opts = {} )
{
  detail::switch_network net( n, opts );
  return net.evaluate( pattern );
}

struct truth_table_summary
{
  bool passed = true;
  std::size_t failures = 0;
  std::vector<pattern_report> patterns;
};

/*! \brief Evaluates every input pattern and compares each output against its oracle. */
inline truth_table_summary verify_truth_table( netlist const& n, switch_options const& opts = {} )
{
  if ( n.inputs().empty() || n.inputs().size() > 16u )
    throw invalid_argument( "verify_truth_table: netlist needs between 1 and 16 inputs" );
  for ( auto const& o : n.outputs() )
    if ( !expected_output( o, std::vector<bool>( n.inputs().size() ) ) )
      throw invalid_argument( "verify_truth_table: no oracle for output '" + o + "'" );
  detail::switch_network net( n, opts );
  truth_table_summary s;
  unsigned const count = 1u << n.inputs().size();
  for ( unsigned p = 0; p < count; ++p )
  {
    auto r = net.evaluate( pattern_bits( p, n.inputs().size() ) );
    if ( !r.all_correct() )
    {
      s.passed = false;
      ++s.failures;
    }
    s.patterns.push_back( std::move( r ) );
  }
  return s;
}

/*! \brief Measured settling residual (V) keyed by (pattern index, output net). */
using residual_table = std::map<std::pair<unsigned, std::string>, double>;

struct output_swing
{
  std::string net;
  bool full_swing = true;               // static classification
  double worst_drop = 0.0;
  std::string worst_pattern;
  std::vector<std::string> degraded_patterns;
  std::vector<std::string> reasons;     // one per degraded pattern

  std::optional<bool> settled_full_swing;
  double worst_residual = 0.0;
  std::string worst_residual_pattern;
  std::vector<std::string> settled_degraded_patterns;
};

struct swing_classification
{
  std::string cell;
  double vdd = 0.0;
  double epsilon = 0.0;
  std::vector<output_swing> outputs;

  output_swing const& output( std::string const& net ) const
  {
    for ( auto const& o : outputs )
      if ( o.net == net )
        return o;
    throw invalid_argument( "no output named '" + net + "'" );
  }
};

/*! \brief Full-swing classification of every output over all input patterns.
 *
 * Static: a pattern is degraded when the output is undefined, weak with a
 * drop above epsilon * vdd, or weak and contested by a leaking off device.
 * Settled: when `residuals` is supplied, each pattern's measured residual
 * replaces the static drop.
 */
inline swing_classification swing_report( netlist const& n, switch_options const& opts = {},
                                          residual_table const* residuals = nullptr )
{
  if ( !( opts.epsilon > 0.0 && opts.epsilon < 0.5 ) )
    throw invalid_argument( "swing_report: epsilon must lie in (0, 0.5)" );
  if ( !( opts.vdd > 0.0 ) )
    throw invalid_argument( "swing_report: vdd must be positive" );
  double const bound = opts.epsilon * opts.vdd;
  swing_classification c{ n.name(), opts.vdd, opts.epsilon, {} };
  for ( auto const& o : n.outputs() )
  {
    output_swing os;
    os.net = o;
    c.outputs.push_back( std::move( os ) );
  }

  detail::switch_network net( n, opts );
  unsigned const count = 1u << n.inputs().size();
  for ( unsigned p = 0; p < count; ++p )
  {
    auto const bits = pattern_bits( p, n.inputs().size() );
    auto const r = net.evaluate( bits );
    auto const label = pattern_string( bits );
    for ( auto& out : c.outputs )
    {
      auto const& v = r.nodes.at( out.net );
      double drop = v.is_defined() ? v.drop : opts.vdd;
      std::string reason;
      if ( !v.is_defined() )
        reason = "output " + v.to_string();
      else if ( v.is_weak() )
      {
        auto const w = std::find_if( r.weak.begin(), r.weak.end(), [&]( auto const& x ) { return x.net == out.net; } );
        if ( drop > bound )
          {
          char num[32];
          std::snprintf( num, sizeof num, "%.4g", drop );
          reason = std::string( "drop " ) + num + " V via " + w->device;
        }
        else if ( !w->contested_by.empty() )
          reason = "weak level contested by " + w->contested_by;
      }
      // degraded patterns outrank merely weak ones when picking the worst
      bool const first_degraded = !reason.empty() && out.full_swing;
      bool const eligible = !reason.empty() || out.full_swing;
      if ( first_degraded || ( eligible && ( drop > out.worst_drop || out.worst_pattern.empty() ) ) )
      {
        out.worst_drop = first_degraded ? drop : std::max( out.worst_drop, drop );
        out.worst_pattern = label;
      }
      if ( !reason.empty() )
      {
        out.full_swing = false;
        out.degraded_patterns.push_back( label );
        out.reasons.push_back( std::move( reason ) );
      }

      if ( residuals )
        if ( auto it = residuals->find( { p, out.net } ); it != residuals->end() )
        {
          if ( !out.settled_full_swing )
            out.settled_full_swing = true;
          if ( it->second > out.worst_residual || out.worst_residual_pattern.empty() )
          {
            out.worst_residual = std::max( out.worst_residual, it->second );
            out.worst_residual_pattern = label;
          }
          if ( it->second > bound )
          {
            out.settled_full_swing = false;
            out.settled_degraded_patterns.push_back( label );
          }
        }
    }
  }
  return c;
}

inline std::string format_swing_text( swing_classification const& c )
{
  std::ostringstream s;
  s << c.cell << "  vdd=" << format_quantity( c.vdd, "V" ) << "  epsilon=" << c.epsilon << "\n";
  for ( auto const& o : c.outputs )
  {
    s << "  " << o.net << ": static " << ( o.full_swing ? "FullSwing" : "Degraded" );
    if ( !o.full_swing )
    {
      s << " at";
      for ( std::size_t i = 0; i < o.degraded_patterns.size(); ++i )
        s << ' ' << o.degraded_patterns[i] << " (" << o.reasons[i] << ")";
    }
    char num[32];
    std::snprintf( num, sizeof num, "%.4g", o.worst_drop );
    s << ", worst drop " << num << " V at " << o.worst_pattern;
    if ( o.settled_full_swing )
    {
      std::snprintf( num, sizeof num, "%.4g", o.worst_residual );
      s << "; settled " << ( *o.settled_full_swing ? "FullSwing" : "Degraded" ) << ", worst residual " << num << " V at "
        << o.worst_residual_pattern;
    }
    s << "\n";
  }
  return s.str();
}

inline std::string format_swing_csv( swing_classification const& c )
{
  std::ostringstream s;
  s << "cell,output,vdd_v,epsilon,static,worst_drop_v,worst_pattern,degraded_patterns,settled,worst_residual_v\n";
  for ( auto const& o : c.outputs )
  {
    std::string pats;
    for ( auto const& p : o.degraded_patterns )
      pats += ( pats.empty() ? "" : " " ) + p;
    char num[64];
    s << c.cell << ',' << o.net << ',' << c.vdd << ',' << c.epsilon << ','
      << ( o.full_swing ? "FullSwing" : "Degraded" ) << ',';
    std::snprintf( num, sizeof num, "%.6g", o.worst_drop );
    s << num << ',' << o.worst_pattern << ',' << pats << ',';
    if ( o.settled_full_swing )
    {
      std::snprintf( num, sizeof num, "%.6g", o.worst_residual );
      s << ( *o.settled_full_swing ? "FullSwing" : "Degraded" ) << ',' << num;
    }
    else
      s << "n/a,";
    s << "\n";
  }
  return s.str();
}

} // namespace cnfa
