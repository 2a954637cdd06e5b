#include <gtest/gtest.h>

#include <cmath>

#include <cnfa/cells.hpp>
#include <cnfa/simulator.hpp>
#include <cnfa/switch_level.hpp>

using namespace cnfa;

namespace
{

/* Step source -> always-on N device -> load capacitor. The gate sits far
   above the step so the channel stays linear. */
struct rc_fixture
{
  double c_load;
  double gate = 1.5;
  double step = 0.01;
  double t_step = 5e-12;
  chirality_vector tube{ 19u, 0u };
  int tubes = 4;

  netlist circuit() const
  {
    netlist n( "rc" );
    n.add_transistor( "MR", device_kind::ncnfet, "in", "g", "out", tube, tubes );
    n.add_capacitor( "CL", "out", "gnd", c_load );
    return n;
  }

  stimulus drive() const
  {
    return { { "g", pwl::dc( gate ) }, { "in", pwl{ { { 0.0, 0.0 }, { t_step, 0.0 }, { t_step + 1e-14, step } } } } };
  }

  device_capacitances parasitics() const
  {
    return cnfet_capacitances( make_rating( polarity::n, tube, {}, tubes ), {} );
  }

  double r_eff( double temperature ) const
  {
    auto const ch = cnfet_channel( make_rating( polarity::n, tube, {}, tubes ), {}, temperature );
    return 1.0 / evaluate_channel( ch, gate - 0.5 * step, 0.0 ).gds;
  }

  double c_out() const { return c_load + parasitics().csb + parasitics().cgs; }

  sim_config config() const
  {
    sim_config cfg;
    cfg.t_stop = t_step + 12.0 * r_eff( cfg.temperature ) * c_out();
    cfg.dt_max = r_eff( cfg.temperature ) * c_out() / 50.0;
    cfg.dt_init = 1e-15;
    cfg.dt_min = 1e-20;
    return cfg;
  }
};

double crossing( waveform const& w, std::string const& net, double level )
{
  auto const& v = w.net( net );
  for ( std::size_t k = 1; k < v.size(); ++k )
    if ( v[k - 1] < level && v[k] >= level )
      return w.time[k - 1] + ( level - v[k - 1] ) / ( v[k] - v[k - 1] ) * ( w.time[k] - w.time[k - 1] );
  return std::nan( "" );
}

double source_charge( waveform const& w, std::size_t s )
{
  double q = 0.0;
  for ( std::size_t k = 1; k < w.time.size(); ++k )
    q += 0.5 * ( w.source_current[s][k] + w.source_current[s][k - 1] ) * ( w.time[k] - w.time[k - 1] );
  return q;
}

stimulus static_inputs( netlist const& n, unsigned pattern, double vdd )
{
  stimulus s;
  auto const bits = pattern_bits( pattern, n.inputs().size() );
  for ( std::size_t i = 0; i < bits.size(); ++i )
    s.push_back( { n.inputs()[i], pwl::dc( bits[i] ? vdd : 0.0 ) } );
  return s;
}

} // namespace

TEST( rc_fixture, half_crossing_matches_analytic_time_constant )
{
  rc_fixture const f{ 10e-15 };
  auto const cfg = f.config();
  auto const w = transient( f.circuit(), f.drive(), cfg );
  double const t50 = crossing( w, "out", 0.5 * f.step ) - f.t_step;
  double const oracle = std::log( 2.0 ) * f.r_eff( cfg.temperature ) * f.c_out();
  EXPECT_NEAR( t50, oracle, 0.05 * oracle );
}

TEST( rc_fixture, doubling_the_load_doubles_the_crossing_time )
{
  rc_fixture const a{ 10e-15 }, b{ 20e-15 };
  auto cfg = b.config();
  double const ta = crossing( transient( a.circuit(), a.drive(), cfg ), "out", 0.5 * a.step ) - a.t_step;
  double const tb = crossing( transient( b.circuit(), b.drive(), cfg ), "out", 0.5 * b.step ) - b.t_step;
  EXPECT_NEAR( tb / ta, 2.0, 0.1 );
}

TEST( rc_fixture, source_charge_equals_stored_charge )
{
  rc_fixture const f{ 10e-15 };
  auto const w = transient( f.circuit(), f.drive(), f.config() );
  auto const p = f.parasitics();
  double const stored = f.step * ( f.c_load + p.cdb + p.cgd + p.csb + p.cgs );
  double const delivered = source_charge( w, w.source_index( "V_in" ) );
  EXPECT_NEAR( delivered, stored, 0.01 * stored );
  EXPECT_LE( w.max_kcl_residual, f.config().newton_itol );
}

TEST( dc, inverter_output_sits_at_the_rail )
{
  netlist n( "inv" );
  n.add_input( "a" );
  n.add_output( "y" );
  n.add_transistor( "MP", device_kind::pcnfet, "y", "a", "vdd" );
  n.add_transistor( "MN", device_kind::ncnfet, "y", "a", "gnd" );
  sim_config cfg;
  cfg.vdd = 0.65;
  auto const low = dc_operating_point( n, cfg, {}, { { "a", pwl::dc( 0.0 ) } } );
  EXPECT_NEAR( low.voltages.at( "y" ), 0.65, 1e-3 );
  auto const high = dc_operating_point( n, cfg, {}, { { "a", pwl::dc( 0.65 ) } } );
  EXPECT_NEAR( high.voltages.at( "y" ), 0.0, 1e-3 );
  EXPECT_LE( low.max_residual, cfg.newton_itol );
}

TEST( dc, symmetric_divider_sits_at_the_midpoint )
{
  double const half = 0.2;
  netlist n( "divider" );
  n.add_transistor( "MU", device_kind::ncnfet, "top", "gu", "mid" );
  n.add_transistor( "ML", device_kind::ncnfet, "mid", "gl", "bot" );
  stimulus const s{ { "top", pwl::dc( half ) }, { "bot", pwl::dc( -half ) }, { "gu", pwl::dc( 0.9 ) },
                    { "gl", pwl::dc( 0.9 - half ) } };
  sim_config cfg;
  auto const r = dc_operating_point( n, cfg, {}, s );
  EXPECT_NEAR( r.voltages.at( "mid" ), 0.0, 1e-6 );
}

TEST( dc, floating_gate_is_singular )
{
  netlist n( "float" );
  n.add_input( "a" );
  n.add_transistor( "M1", device_kind::ncnfet, "y", "g", "gnd" );
  n.add_capacitor( "C1", "g", "h", 1e-15 );
  n.add_capacitor( "C2", "y", "gnd", 1e-15 );
  sim_config cfg;
  cfg.gmin = 0.0;
  EXPECT_THROW( circuit( n, cfg ), singular_system_error );
}

TEST( dc, every_cell_satisfies_kcl_at_each_supply )
{
  for ( auto const& spec : all_cells() )
  {
    auto const n = build_cell( spec.name );
    for ( double vdd : { 0.5, 0.65, 0.8 } )
      for ( unsigned p = 0; p < ( 1u << n.inputs().size() ); ++p )
      {
        sim_config cfg;
        cfg.vdd = vdd;
        auto const r = dc_operating_point( n, cfg, {}, static_inputs( n, p, vdd ) );
        EXPECT_LE( r.max_residual, cfg.newton_itol ) << spec.label << " vdd " << vdd << " pattern " << p << " at " << r.worst_node;
        auto const expect = expected_outputs( spec.name, pattern_bits( p, n.inputs().size() ) );
        for ( std::size_t o = 0; o < n.outputs().size(); ++o )
          EXPECT_EQ( r.voltages.at( n.outputs()[o] ) > 0.5 * vdd, expect[o] ) << spec.label << " " << n.outputs()[o] << " " << p;
      }
  }
}

TEST( transient, dc_stimulus_holds_equilibrium )
{
  auto const n = build_cn10pfs();
  sim_config cfg;
  cfg.t_stop = 200e-12;
  auto const stim = static_inputs( n, 0b101u, cfg.vdd );
  auto const op = dc_operating_point( n, cfg, {}, stim );
  auto const w = transient( n, stim, cfg );
  for ( auto const& net : w.nets )
    for ( double v : w.net( net ) )
      ASSERT_NEAR( v, op.voltages.at( net ), cfg.newton_vtol ) << net;
}

TEST( transient, bitwise_deterministic )
{
  rc_fixture const f{ 5e-15 };
  auto const a = transient( f.circuit(), f.drive(), f.config() );
  auto const b = transient( f.circuit(), f.drive(), f.config() );
  EXPECT_EQ( a.time, b.time );
  EXPECT_EQ( a.values, b.values );
  EXPECT_EQ( a.source_current, b.source_current );
}

TEST( transient, interpolation_and_lookup )
{
  rc_fixture const f{ 5e-15 };
  auto const w = transient( f.circuit(), f.drive(), f.config(), {}, { "out" } );
  EXPECT_EQ( w.nets, ( std::vector<std::string>{ "out" } ) );
  EXPECT_EQ( w.at( "out", -1.0 ), w.net( "out" ).front() );
  EXPECT_EQ( w.at( "out", 1.0 ), w.net( "out" ).back() );
  EXPECT_THROW( w.net( "in" ), invalid_argument );
  EXPECT_THROW( w.source_index( "nope" ), invalid_argument );
}

TEST( config, rejects_inconsistent_steps )
{
  sim_config cfg;
  cfg.dt_min = 1e-10;
  EXPECT_THROW( cfg.validate(), invalid_argument );
  cfg = {};
  cfg.vdd = 0.0;
  EXPECT_THROW( cfg.validate(), invalid_argument );
}
