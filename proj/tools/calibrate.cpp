#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <cnfa/cnfa.hpp>

using namespace cnfa;

namespace
{

struct calibration_point
{
  double vdd = 0.9;
  double cload = 2.1e-15;
  double target_delay = 20e-12;
  double temperature = 25.0;
};

/* Mean of the falling and rising 50% delays of a single-tube (19,0) inverter. */
double inverter_delay( model_set const& models, calibration_point const& p )
{
  netlist n( "calibration_inverter" );
  n.add_input( "in" );
  n.add_output( "out" );
  n.add_transistor( "MP", device_kind::pcnfet, "out", "in", "vdd", { 19u, 0u }, 1 );
  n.add_transistor( "MN", device_kind::ncnfet, "out", "in", "gnd", { 19u, 0u }, 1 );
  n.add_capacitor( "CL", "out", "gnd", p.cload );

  double const ramp = 1e-12, t_rise = 100e-12, t_fall = 600e-12;
  stimulus s{ { "in", pwl{ { { 0.0, 0.0 }, { t_rise, 0.0 }, { t_rise + ramp, p.vdd }, { t_fall, p.vdd }, { t_fall + ramp, 0.0 } } } } };
  sim_config cfg;
  cfg.vdd = p.vdd;
  cfg.temperature = p.temperature;
  cfg.t_stop = 1.1e-9;
  cfg.dt_init = 5e-14;
  cfg.dt_max = 2e-12;
  cfg.dt_min = 1e-19;
  auto const w = transient( n, s, cfg, models, { "out" } );

  auto crossing = [&]( double t0, bool rising ) {
    auto const& v = w.net( "out" );
    double const th = 0.5 * p.vdd;
    for ( std::size_t k = 1; k < w.time.size(); ++k )
    {
      if ( w.time[k] <= t0 )
        continue;
      bool const hit = rising ? ( v[k - 1] <= th && v[k] > th ) : ( v[k - 1] >= th && v[k] < th );
      if ( hit )
        return w.time[k - 1] + ( th - v[k - 1] ) * ( w.time[k] - w.time[k - 1] ) / ( v[k] - v[k - 1] );
    }
    throw simulation_error( "calibration inverter output never crossed 50%" );
  };
  double const fall = crossing( t_rise, false ) - ( t_rise + 0.5 * ramp );
  double const rise = crossing( t_fall, true ) - ( t_fall + 0.5 * ramp );
  return 0.5 * ( fall + rise );
}

double on_off_ratio( model_set const& models, calibration_point const& p )
{
  auto const r = make_rating( polarity::n, { 19u, 0u }, models.cnfet, 1 );
  return drain_current( r, models.cnfet, p.vdd, p.vdd, p.temperature ) /
         drain_current( r, models.cnfet, 0.0, p.vdd, p.temperature );
}

/* Delay scales close to 1/k_drive, so a few multiplicative corrections converge. */
double calibrate_k_drive( model_set models, calibration_point const& p, bool verbose )
{
  for ( int it = 0; it < 12; ++it )
  {
    double const d = inverter_delay( models, p );
    if ( verbose )
      std::printf( "  k_drive=%.6g A/V^2  delay=%.4g ps\n", models.cnfet.k_drive, d * 1e12 );
    double const ratio = d / p.target_delay;
    models.cnfet.k_drive *= ratio;
    if ( std::abs( ratio - 1.0 ) < 1e-4 )
      break;
  }
  return models.cnfet.k_drive;
}

double round_sig( double v, int digits )
{
  double const e = std::pow( 10.0, std::floor( std::log10( std::abs( v ) ) ) - ( digits - 1 ) );
  return std::round( v / e ) * e;
}

bool table1_verbatim( cnfet_model_params const& c )
{
  cnfet_model_params const d;
  return c.lch == d.lch && c.lgeff == d.lgeff && c.lss == d.lss && c.ldd == d.ldd && c.kgate == d.kgate &&
         c.tox == d.tox && c.csub == d.csub && c.efi == d.efi;
}

std::string read_file( std::string const& path )
{
  std::ifstream in( path );
  if ( !in )
    throw invalid_argument( "cannot open '" + path + "'" );
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "Fits k_drive so a (19,0) inverter meets a target delay and checks parameter files" };
  calibration_point p;
  std::string params_path, check_path, write_path;
  double target_ps = 20.0, cload_ff = 2.1;
  app.add_option( "--params", params_path, "Start from this parameter file" );
  app.add_option( "--target", target_ps, "Target inverter delay in ps" );
  app.add_option( "--vdd", p.vdd, "Supply voltage in V" );
  app.add_option( "--cload", cload_ff, "Load in fF" );
  app.add_option( "--write", write_path, "Write the calibrated parameter file here" );
  app.add_option( "--check", check_path, "Verify that a parameter file matches the calibration" );
  CLI11_PARSE( app, argc, argv );
  p.target_delay = target_ps * 1e-12;
  p.cload = cload_ff * 1e-15;

  try
  {
    if ( !check_path.empty() )
    {
      auto const m = parse_model_params( read_file( check_path ) );
      bool ok = true;
      if ( !table1_verbatim( m.cnfet ) )
      {
        std::cout << "FAIL physical parameters differ from the 32 nm device table\n";
        ok = false;
      }
      double const k = calibrate_k_drive( m, p, false );
      double const rel = m.cnfet.k_drive / k - 1.0;
      std::printf( "%s k_drive %.6g vs calibrated %.6g (%+.2f%%)\n", std::abs( rel ) <= 0.02 ? "ok  " : "FAIL",
                   m.cnfet.k_drive, k, 100.0 * rel );
      ok = ok && std::abs( rel ) <= 0.02;
      double const d = inverter_delay( m, p );
      std::printf( "     inverter delay %.4g ps (target %.4g ps)\n", d * 1e12, target_ps );
      double const ratio = on_off_ratio( m, p );
      std::printf( "%s Ion/Ioff %.3g (need >= 1e4)\n", ratio >= 1e4 ? "ok  " : "FAIL", ratio );
      ok = ok && ratio >= 1e4;
      if ( !( m == model_set{} ) )
        std::cout << "note file differs from the compiled-in defaults\n";
      return ok ? 0 : 1;
    }

    model_set m = params_path.empty() ? model_set{} : parse_model_params( read_file( params_path ) );
    std::printf( "calibrating at vdd=%.3g V, cload=%.3g fF, target %.3g ps\n", p.vdd, cload_ff, target_ps );
    m.cnfet.k_drive = round_sig( calibrate_k_drive( m, p, true ), 3 );
    std::printf( "k_drive = %.6g A/V^2 per tube (3 significant digits)\n", m.cnfet.k_drive );
    std::printf( "inverter delay with rounded k_drive: %.4g ps\n", inverter_delay( m, p ) * 1e12 );
    std::printf( "Ion/Ioff at (19,0): %.3g\n", on_off_ratio( m, p ) );
    if ( !write_path.empty() )
    {
      std::ofstream out( write_path );
      out << emit_model_params( m );
      if ( !out )
        throw invalid_argument( "cannot write '" + write_path + "'" );
    }
    return 0;
  }
  catch ( std::exception const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
