#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "device_physics.hpp"
#include "error.hpp"
#include "netlist.hpp"
#include "params_file.hpp"

namespace cnfa
{

enum class integration_method
{
  backward_euler,
  trapezoidal
};

struct sim_config
{
  double t_stop = 1e-9;
  double dt_init = 1e-13;
  double dt_min = 1e-18;
  double dt_max = 1e-11;
  double newton_vtol = 1e-6; // V
  double newton_itol = 1e-9; // A, KCL residual
  int newton_max_iters = 60;
  double temperature = 25.0;
  double vdd = 0.65;
  integration_method integration = integration_method::trapezoidal;
  double gmin = 1e-12;      // S from every node to ground
  double dv_target = 0.03;  // preferred largest node change per step, fraction of vdd

  void validate() const
  {
    if ( !( dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max && dt_max < t_stop ) )
      throw invalid_argument( "sim_config: need 0 < dt_min <= dt_init <= dt_max < t_stop" );
    if ( !( newton_vtol > 0.0 && newton_itol > 0.0 && newton_max_iters > 0 && gmin >= 0.0 && dv_target > 0.0 ) )
      throw invalid_argument( "sim_config: tolerances must be positive" );
    if ( !( vdd > 0.0 ) || !std::isfinite( temperature ) )
      throw invalid_argument( "sim_config: vdd must be positive" );
  }
};

/*! \brief Waveforms applied to nets, each referenced to gnd. */
using stimulus = std::vector<std::pair<std::string, pwl>>;

/*! \brief Recorded transient result.
 *
 * `source_current` is the current each source delivers out of its plus
 * terminal, so `source_voltage * source_current` is the power it supplies.
 */
struct waveform
{
  std::vector<double> time;
  std::vector<std::string> nets;
  std::vector<std::vector<double>> values;
  std::vector<std::string> sources;
  std::vector<std::vector<double>> source_voltage;
  std::vector<std::vector<double>> source_current;
  double max_kcl_residual = 0.0;
  std::size_t rejected_steps = 0;

  std::vector<double> const& net( std::string const& name ) const
  {
    auto const it = std::find( nets.begin(), nets.end(), name );
    if ( it == nets.end() )
      throw invalid_argument( "net '" + name + "' was not recorded" );
    return values[static_cast<std::size_t>( it - nets.begin() )];
  }

  std::size_t source_index( std::string const& name ) const
  {
    auto const it = std::find( sources.begin(), sources.end(), name );
    if ( it == sources.end() )
      throw invalid_argument( "no source named '" + name + "'" );
    return static_cast<std::size_t>( it - sources.begin() );
  }

  /*! \brief Linear interpolation of a recorded net at time `t`. */
  double at( std::string const& name, double t ) const
  {
    auto const& v = net( name );
    if ( t <= time.front() )
      return v.front();
    if ( t >= time.back() )
      return v.back();
    auto const k = static_cast<std::size_t>( std::upper_bound( time.begin(), time.end(), t ) - time.begin() );
    double const f = ( t - time[k - 1] ) / ( time[k] - time[k - 1] );
    return v[k - 1] + f * ( v[k] - v[k - 1] );
  }

  /*! \brief Energy (J) supplied by the selected sources over [t0, t1], trapezoidal in time. */
  double energy( std::vector<std::size_t> const& which, double t0, double t1 ) const
  {
    auto power = [&]( std::size_t k ) {
      double p = 0.0;
      for ( auto s : which )
        p += source_voltage[s][k] * source_current[s][k];
      return p;
    };
    double e = 0.0;
    for ( std::size_t k = 1; k < time.size(); ++k )
    {
      double const a = std::max( time[k - 1], t0 );
      double const b = std::min( time[k], t1 );
      if ( b <= a )
        continue;
      double const h = time[k] - time[k - 1];
      double const p0 = power( k - 1 );
      double const p1 = power( k );
      auto lerp = [&]( double t ) { return p0 + ( p1 - p0 ) * ( t - time[k - 1] ) / h; };
      e += 0.5 * ( lerp( a ) + lerp( b ) ) * ( b - a );
    }
    return e;
  }
};

struct dc_result
{
  std::map<std::string, double> voltages;
  std::map<std::string, double> source_currents; // delivered out of the plus terminal
  double max_residual = 0.0;                      // A, worst KCL mismatch
  std::string worst_node;
  int iterations = 0;
  std::string strategy; // newton, gmin-stepping or source-stepping
};

/*! \brief Netlist compiled to modified nodal form.
 *
 * Unknowns are the node voltages (gnd is the reference) followed by one
 * branch current per voltage source. A `vdd` source at `cfg.vdd` is added
 * when the netlist uses the rail without driving it.
 */
class circuit
{
public:
  circuit( netlist const& n, sim_config const& cfg, model_set const& models = {}, stimulus const& stim = {} )
      : cfg_( cfg )
  {
    for ( auto const& net : n.nets() )
      node( net );
    for ( auto const& [net, wave] : stim )
      add_source( "V_" + net_name( net ), node( net ), -1, wave );

    bool vdd_driven = false;
    for ( auto const& d : n.devices() )
      if ( d.kind == device_kind::vsrc && d.terminals[0] == vdd_net )
        vdd_driven = true;
    for ( auto const& [net, wave] : stim )
      if ( net_name( net ) == vdd_net )
        vdd_driven = true;

    for ( auto const& d : n.devices() )
    {
      switch ( d.kind )
      {
      case device_kind::vsrc:
        add_source( d.id, node( d.terminals[0] ), node( d.terminals[1] ), d.source );
        break;
      case device_kind::cap:
        add_cap( node( d.terminals[0] ), node( d.terminals[1] ), d.capacitance );
        break;
      default:
        add_transistor( d, models );
        break;
      }
    }
    if ( !vdd_driven && index_.count( std::string( vdd_net ) ) )
      add_source( "vdd", index_.at( std::string( vdd_net ) ), -1, pwl::dc( cfg.vdd ) );

    check_dc_paths();
  }

  std::size_t node_count() const noexcept { return names_.size(); }
  std::vector<std::string> const& node_names() const noexcept { return names_; }
  std::size_t source_count() const noexcept { return sources_.size(); }

  /*! \brief Nonlinear DC solution at time `t` (sources evaluated there, capacitors open). */
  dc_result dc_operating_point( double t = 0.0, std::map<std::string, double> const* guess = nullptr )
  {
    auto const size = unknowns();
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero( static_cast<Eigen::Index>( size ) );
    for ( std::size_t i = 0; i < names_.size(); ++i )
    {
      double v = 0.5 * cfg_.vdd;
      if ( guess )
        if ( auto it = guess->find( names_[i] ); it != guess->end() )
          v = it->second;
      x0[static_cast<Eigen::Index>( i )] = v;
    }
    for ( auto const& s : sources_ )
      if ( s.minus < 0 )
        x0[s.plus] = s.wave.at( t );

    dc_result r;
    Eigen::VectorXd x = x0;
    int iterations = 0;
    if ( newton( x, t, 0.0, false, cfg_.gmin, 1.0, 4 * cfg_.newton_max_iters, iterations ) )
      r.strategy = "newton";
    else
    {
      x = x0;
      bool ok = true;
      for ( double g = 1e-3; g > cfg_.gmin && ok; g *= 0.1 )
        ok = newton( x, t, 0.0, false, g, 1.0, 4 * cfg_.newton_max_iters, iterations );
      if ( ok && newton( x, t, 0.0, false, cfg_.gmin, 1.0, 4 * cfg_.newton_max_iters, iterations ) )
        r.strategy = "gmin-stepping";
      else
      {
        x = Eigen::VectorXd::Zero( static_cast<Eigen::Index>( size ) );
        ok = true;
        for ( int step = 1; step <= 20 && ok; ++step )
          ok = newton( x, t, 0.0, false, cfg_.gmin, step / 20.0, 4 * cfg_.newton_max_iters, iterations );
        if ( !ok )
        {
          auto const [res, worst] = kcl_residual( x, t, 0.0, false, cfg_.gmin, 1.0 );
          throw convergence_error( "DC operating point did not converge", worst, res );
        }
        r.strategy = "source-stepping";
      }
    }
    auto const [res, worst] = kcl_residual( x, t, 0.0, false, cfg_.gmin, 1.0 );
    r.max_residual = res;
    r.worst_node = worst;
    r.iterations = iterations;
    for ( std::size_t i = 0; i < names_.size(); ++i )
      r.voltages[names_[i]] = x[static_cast<Eigen::Index>( i )];
    for ( std::size_t k = 0; k < sources_.size(); ++k )
      r.source_currents[sources_[k].name] = -x[static_cast<Eigen::Index>( names_.size() + k )];
    state_ = x;
    return r;
  }

  /*! \brief Transient analysis from the DC operating point at t = 0.
   *
   * Steps land on every waveform breakpoint, and the step right after one
   * uses backward Euler. A step is halved when Newton fails and shrunk when
   * a node moves by more than twice the target; the run aborts when the
   * step would fall below dt_min.
   */
  waveform transient( std::vector<std::string> record = {}, std::map<std::string, double> const* guess = nullptr )
  {
    cfg_.validate();
    dc_operating_point( 0.0, guess );
    if ( record.empty() )
      record = names_;
    std::vector<long> rec_index;
    for ( auto const& r : record )
    {
      auto const it = index_.find( net_name( r ) );
      if ( it == index_.end() && net_name( r ) != gnd_net )
        throw invalid_argument( "cannot record unknown net '" + r + "'" );
      rec_index.push_back( it == index_.end() ? -1 : static_cast<long>( it->second ) );
    }

    waveform w;
    w.nets = record;
    w.values.resize( record.size() );
    for ( auto const& s : sources_ )
      w.sources.push_back( s.name );
    w.source_voltage.resize( sources_.size() );
    w.source_current.resize( sources_.size() );

    auto const breakpoints = collect_breakpoints();
    Eigen::VectorXd x = state_;
    cap_v_.assign( caps_.size(), 0.0 );
    cap_i_.assign( caps_.size(), 0.0 );
    for ( std::size_t k = 0; k < caps_.size(); ++k )
      cap_v_[k] = volt( x, caps_[k].a ) - volt( x, caps_[k].b );

    double t = 0.0;
    auto store = [&]( Eigen::VectorXd const& s, double time ) {
      w.time.push_back( time );
      for ( std::size_t i = 0; i < rec_index.size(); ++i )
        w.values[i].push_back( rec_index[i] < 0 ? 0.0 : s[rec_index[i]] );
      for ( std::size_t k = 0; k < sources_.size(); ++k )
      {
        w.source_voltage[k].push_back( sources_[k].wave.at( time ) );
        w.source_current[k].push_back( -s[static_cast<Eigen::Index>( names_.size() + k )] );
      }
    };
    store( x, t );

    double const dv_target = cfg_.dv_target * cfg_.vdd;
    double h = cfg_.dt_init;
    bool after_break = true;
    std::size_t next_bp = 0;
    while ( t < cfg_.t_stop * ( 1.0 - 1e-12 ) )
    {
      while ( next_bp < breakpoints.size() && breakpoints[next_bp] <= t * ( 1.0 + 1e-12 ) + 1e-24 )
        ++next_bp;
      double const bp = next_bp < breakpoints.size() ? breakpoints[next_bp] : cfg_.t_stop;
      h = std::min( h, cfg_.dt_max );
      bool hits = false;
      if ( t + h >= bp - cfg_.dt_min )
      {
        h = bp - t;
        hits = true;
      }
      else if ( t + 2.0 * h > bp )
        h = 0.5 * ( bp - t ); // avoid a sliver step before the breakpoint

      bool const trap = cfg_.integration == integration_method::trapezoidal && !after_break;
      Eigen::VectorXd trial = x;
      int iterations = 0;
      bool const ok = newton( trial, t + h, h, trap, cfg_.gmin, 1.0, cfg_.newton_max_iters, iterations );
      double dv = 0.0;
      if ( ok )
        for ( std::size_t i = 0; i < names_.size(); ++i )
          dv = std::max( dv, std::abs( trial[static_cast<Eigen::Index>( i )] - x[static_cast<Eigen::Index>( i )] ) );

      if ( !ok || ( dv > 2.0 * dv_target && h > 4.0 * cfg_.dt_min ) )
      {
        ++w.rejected_steps;
        h *= ok ? std::max( 0.25, 0.9 * dv_target / dv ) : 0.5;
        if ( h < cfg_.dt_min )
          throw simulation_error( "time step fell below dt_min at t = " + format_quantity( t, "s" ) );
        continue;
      }

      auto const [res, worst] = kcl_residual( trial, t + h, h, trap, cfg_.gmin, 1.0 );
      w.max_kcl_residual = std::max( w.max_kcl_residual, res );
      for ( std::size_t k = 0; k < caps_.size(); ++k )
      {
        double const v = volt( trial, caps_[k].a ) - volt( trial, caps_[k].b );
        cap_i_[k] = cap_current( k, v, h, trap );
        cap_v_[k] = v;
      }
      x = trial;
      t = hits ? bp : t + h;
      store( x, t );

      if ( hits )
      {
        after_break = true;
        h = cfg_.dt_init;
      }
      else
      {
        after_break = false;
        double const grow = dv > 0.0 ? 0.9 * dv_target / dv : 2.0;
        h *= std::clamp( grow, 0.5, 2.0 );
      }
    }
    state_ = x;
    return w;
  }

private:
  struct transistor
  {
    long d = -1, g = -1, s = -1;
    channel ch;
  };

  struct capacitor
  {
    long a = -1, b = -1;
    double c = 0.0;
  };

  struct source
  {
    std::string name;
    long plus = -1, minus = -1;
    pwl wave;
  };

  long node( std::string const& raw )
  {
    auto const name = net_name( raw );
    if ( name == gnd_net )
      return -1;
    auto const [it, inserted] = index_.emplace( name, names_.size() );
    if ( inserted )
      names_.push_back( name );
    return static_cast<long>( it->second );
  }

  void add_source( std::string name, long plus, long minus, pwl wave )
  {
    if ( plus == minus )
      throw invalid_argument( "source '" + name + "' is shorted" );
    sources_.push_back( { std::move( name ), plus, minus, std::move( wave ) } );
  }

  void add_cap( long a, long b, double c )
  {
    if ( a != b && c > 0.0 )
      caps_.push_back( { a, b, c } );
  }

  void add_transistor( device_instance const& d, model_set const& models )
  {
    transistor t;
    t.d = node( d.drain() );
    t.g = node( d.gate() );
    t.s = node( d.source_net() );
    auto const pol = polarity_of( d.kind );
    device_capacitances c;
    if ( is_cnfet( d.kind ) )
    {
      auto const rating = make_rating( pol, d.chirality, models.cnfet, d.tubes );
      t.ch = cnfet_channel( rating, models.cnfet, cfg_.temperature );
      c = cnfet_capacitances( rating, models.cnfet );
    }
    else
    {
      double const w = d.w > 0.0 ? d.w : models.mos.default_w_n * ( pol == polarity::p ? 2.0 : 1.0 );
      double const l = d.l > 0.0 ? d.l : models.mos.default_l;
      t.ch = mos_channel( pol, w, l, models.mos, cfg_.temperature );
      c = mos_capacitances( w, l, models.mos );
    }
    transistors_.push_back( t );
    add_cap( t.g, t.s, c.cgs );
    add_cap( t.g, t.d, c.cgd );
    add_cap( t.d, -1, c.cdb );
    add_cap( t.s, -1, c.csb );
  }

  /* Every node needs a conducting (channel or source) path to ground;
     otherwise its DC voltage is undetermined. */
  void check_dc_paths() const
  {
    std::vector<std::size_t> parent( names_.size() + 1 );
    std::iota( parent.begin(), parent.end(), 0u );
    auto const ground = names_.size();
    auto slot = [&]( long i ) { return i < 0 ? ground : static_cast<std::size_t>( i ); };
    auto root = [&]( std::size_t i ) {
      while ( parent[i] != i )
        i = parent[i] = parent[parent[i]];
      return i;
    };
    auto unite = [&]( long a, long b ) { parent[root( slot( a ) )] = root( slot( b ) ); };
    for ( auto const& t : transistors_ )
      unite( t.d, t.s );
    for ( auto const& s : sources_ )
      unite( s.plus, s.minus );
    for ( std::size_t i = 0; i < names_.size(); ++i )
      if ( root( i ) != root( ground ) )
        throw singular_system_error( "net '" + names_[i] + "' has no DC path to a source or ground" );
  }

  std::vector<double> collect_breakpoints() const
  {
    std::vector<double> bps;
    for ( auto const& s : sources_ )
      for ( auto const& [tp, v] : s.wave.points )
        if ( tp > 0.0 && tp < cfg_.t_stop )
          bps.push_back( tp );
    bps.push_back( cfg_.t_stop );
    std::sort( bps.begin(), bps.end() );
    bps.erase( std::unique( bps.begin(), bps.end() ), bps.end() );
    return bps;
  }

  std::size_t unknowns() const noexcept { return names_.size() + sources_.size(); }

  static double volt( Eigen::VectorXd const& x, long i ) { return i < 0 ? 0.0 : x[i]; }

  double cap_current( std::size_t k, double v, double h, bool trap ) const
  {
    double const geq = ( trap ? 2.0 : 1.0 ) * caps_[k].c / h;
    return geq * ( v - cap_v_[k] ) - ( trap ? cap_i_[k] : 0.0 );
  }

  /* Residual F(x) and Jacobian; h == 0 is the DC problem. */
  void assemble( Eigen::VectorXd const& x, double t, double h, bool trap, double gmin, double scale, Eigen::VectorXd& f,
                 Eigen::MatrixXd& j ) const
  {
    auto const size = static_cast<Eigen::Index>( unknowns() );
    f.setZero( size );
    j.setZero( size, size );
    auto add_f = [&]( long i, double v ) {
      if ( i >= 0 )
        f[i] += v;
    };
    auto add_j = [&]( long r, long c, double v ) {
      if ( r >= 0 && c >= 0 )
        j( r, c ) += v;
    };

    for ( std::size_t i = 0; i < names_.size(); ++i )
    {
      auto const k = static_cast<Eigen::Index>( i );
      f[k] += gmin * x[k];
      j( k, k ) += gmin;
    }

    for ( auto const& t_ : transistors_ )
    {
      double const vd = volt( x, t_.d ), vg = volt( x, t_.g ), vs = volt( x, t_.s );
      auto const e = evaluate_channel( t_.ch, vg - vs, vd - vs );
      add_f( t_.d, e.id );
      add_f( t_.s, -e.id );
      double const dvd = e.gds, dvg = e.gm, dvs = -e.gm - e.gds;
      add_j( t_.d, t_.d, dvd );
      add_j( t_.d, t_.g, dvg );
      add_j( t_.d, t_.s, dvs );
      add_j( t_.s, t_.d, -dvd );
      add_j( t_.s, t_.g, -dvg );
      add_j( t_.s, t_.s, -dvs );
    }

    if ( h > 0.0 )
      for ( std::size_t k = 0; k < caps_.size(); ++k )
      {
        auto const& c = caps_[k];
        double const geq = ( trap ? 2.0 : 1.0 ) * c.c / h;
        double const i = cap_current( k, volt( x, c.a ) - volt( x, c.b ), h, trap );
        add_f( c.a, i );
        add_f( c.b, -i );
        add_j( c.a, c.a, geq );
        add_j( c.a, c.b, -geq );
        add_j( c.b, c.a, -geq );
        add_j( c.b, c.b, geq );
      }

    for ( std::size_t k = 0; k < sources_.size(); ++k )
    {
      auto const& s = sources_[k];
      auto const r = static_cast<long>( names_.size() + k );
      double const jb = x[r];
      add_f( s.plus, jb );
      add_f( s.minus, -jb );
      add_j( s.plus, r, 1.0 );
      add_j( s.minus, r, -1.0 );
      f[r] = volt( x, s.plus ) - volt( x, s.minus ) - scale * s.wave.at( t );
      add_j( r, s.plus, 1.0 );
      add_j( r, s.minus, -1.0 );
    }
  }

  std::pair<double, std::string> kcl_residual( Eigen::VectorXd const& x, double t, double h, bool trap, double gmin,
                                               double scale ) const
  {
    Eigen::VectorXd f;
    Eigen::MatrixXd j;
    assemble( x, t, h, trap, gmin, scale, f, j );
    double worst = 0.0;
    std::string name;
    for ( std::size_t i = 0; i < names_.size(); ++i )
      if ( std::abs( f[static_cast<Eigen::Index>( i )] ) >= worst )
      {
        worst = std::abs( f[static_cast<Eigen::Index>( i )] );
        name = names_[i];
      }
    return { worst, name };
  }

  bool newton( Eigen::VectorXd& x, double t, double h, bool trap, double gmin, double scale, int max_iters,
               int& iterations ) const
  {
    Eigen::VectorXd f;
    Eigen::MatrixXd j;
    double last_dv = std::numeric_limits<double>::infinity();
    auto const nodes = static_cast<Eigen::Index>( names_.size() );
    for ( int it = 0; it <= max_iters; ++it )
    {
      assemble( x, t, h, trap, gmin, scale, f, j );
      double kcl = 0.0, src = 0.0;
      for ( Eigen::Index i = 0; i < f.size(); ++i )
        ( i < nodes ? kcl : src ) = std::max( i < nodes ? kcl : src, std::abs( f[i] ) );
      if ( !std::isfinite( kcl ) || !std::isfinite( src ) )
        return false;
      if ( it > 0 && kcl <= cfg_.newton_itol && src <= cfg_.newton_vtol && last_dv <= cfg_.newton_vtol )
        return true;
      if ( it == max_iters )
        break;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu( j );
      Eigen::VectorXd dx = lu.solve( -f );
      if ( !dx.allFinite() )
        throw singular_system_error( "singular nodal matrix" );
      last_dv = 0.0;
      for ( Eigen::Index i = 0; i < nodes; ++i )
      {
        dx[i] = std::clamp( dx[i], -0.25, 0.25 );
        last_dv = std::max( last_dv, std::abs( dx[i] ) );
      }
      x += dx;
      ++iterations;
    }
    return false;
  }

  sim_config cfg_;
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::vector<transistor> transistors_;
  std::vector<capacitor> caps_;
  std::vector<source> sources_;
  Eigen::VectorXd state_;
  std::vector<double> cap_v_;
  std::vector<double> cap_i_;
};

inline dc_result dc_operating_point( netlist const& n, sim_config const& cfg, model_set const& models = {},
                                     stimulus const& stim = {}, std::map<std::string, double> const* guess = nullptr )
{
  circuit c( n, cfg, models, stim );
  return c.dc_operating_point( 0.0, guess );
}

inline waveform transient( netlist const& n, stimulus const& stim, sim_config const& cfg, model_set const& models = {},
                           std::vector<std::string> record = {} )
{
  circuit c( n, cfg, models, stim );
  return c.transient( std::move( record ) );
}

} // namespace cnfa
