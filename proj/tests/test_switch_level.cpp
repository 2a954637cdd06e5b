#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <cnfa/cells.hpp>
#include <cnfa/switch_level.hpp>

using namespace cnfa;

namespace
{

std::vector<switch_value> lattice_samples()
{
  return { switch_value::z(),           switch_value::x(),           switch_value::strong( false ),
           switch_value::strong( true ), switch_value::weak( false, 0.1 ), switch_value::weak( false, 0.3 ),
           switch_value::weak( true, 0.1 ), switch_value::weak( true, 0.2855 ) };
}

double vth_of( chirality_vector c )
{
  return threshold_voltage( cnt_diameter( c ) );
}

netlist inverter()
{
  netlist n( "inv" );
  n.add_input( "a" );
  n.add_output( "out" );
  n.add_transistor( "MP", device_kind::pcnfet, "out", "a", "vdd" );
  n.add_transistor( "MN", device_kind::ncnfet, "out", "a", "gnd" );
  return n;
}

} // namespace

TEST( join, algebraic_laws )
{
  auto const s = lattice_samples();
  for ( auto const& a : s )
  {
    EXPECT_EQ( join( a, a ), a ) << "idempotent " << a.to_string();
    EXPECT_EQ( join( a, switch_value::z() ), a ) << "Z identity";
    EXPECT_EQ( join( a, switch_value::x() ), switch_value::x() ) << "X absorbs";
    for ( auto const& b : s )
    {
      EXPECT_EQ( join( a, b ), join( b, a ) ) << a.to_string() << " " << b.to_string();
      for ( auto const& c : s )
        EXPECT_EQ( join( join( a, b ), c ), join( a, join( b, c ) ) )
            << a.to_string() << " " << b.to_string() << " " << c.to_string();
    }
  }
}

TEST( join, strength_ordering )
{
  EXPECT_EQ( join( switch_value::strong( true ), switch_value::weak( true, 0.1 ) ), switch_value::strong( true ) );
  EXPECT_EQ( join( switch_value::weak( false, 0.3 ), switch_value::weak( false, 0.1 ) ), switch_value::weak( false, 0.1 ) );
  EXPECT_EQ( join( switch_value::weak( false, 0.1 ), switch_value::weak( true, 0.1 ) ), switch_value::x() );
  EXPECT_EQ( join( switch_value::strong( false ), switch_value::strong( true ) ), switch_value::x() );
}

TEST( transmit, threshold_drops )
{
  EXPECT_EQ( transmit( switch_value::strong( true ), polarity::n, 0.2 ), switch_value::weak( true, 0.2 ) );
  EXPECT_EQ( transmit( switch_value::strong( false ), polarity::n, 0.2 ), switch_value::strong( false ) );
  EXPECT_EQ( transmit( switch_value::strong( false ), polarity::p, 0.2 ), switch_value::weak( false, 0.2 ) );
  EXPECT_EQ( transmit( switch_value::weak( true, 0.3 ), polarity::n, 0.2 ), switch_value::weak( true, 0.3 ) );
  EXPECT_EQ( transmit( switch_value::z(), polarity::n, 0.2 ), switch_value::z() );
}

TEST( evaluate, inverter_is_restoring )
{
  auto const n = inverter();
  EXPECT_EQ( evaluate_static( n, { false } ).nodes.at( "out" ), switch_value::strong( true ) );
  EXPECT_EQ( evaluate_static( n, { true } ).nodes.at( "out" ), switch_value::strong( false ) );
}

TEST( evaluate, xor_module_examples )
{
  auto const n = build_xor_cell();
  double const vp = vth_of( { 55u, 0u } );
  EXPECT_EQ( evaluate_static( n, { true, true } ).nodes.at( "out" ), switch_value::strong( false ) );
  auto const v01 = evaluate_static( n, { false, true } ).nodes.at( "out" );
  ASSERT_TRUE( v01.logic().has_value() );
  EXPECT_TRUE( *v01.logic() );
  auto const v00 = evaluate_static( n, { false, false } ).nodes.at( "out" );
  EXPECT_EQ( v00.level, switch_level::weak0 );
  EXPECT_NEAR( v00.drop, vp, 1e-12 );
}

TEST( evaluate, cn9p4g_weak_carry_at_001_and_110 )
{
  auto const n = build_cn9p4g();
  double const vt = vth_of( { 55u, 0u } );
  auto const r110 = evaluate_static( n, pattern_bits( 0b110u, 3 ) );
  EXPECT_EQ( r110.nodes.at( "cout" ).level, switch_level::weak1 );
  EXPECT_NEAR( r110.nodes.at( "cout" ).drop, vt, 1e-12 );
  auto const r001 = evaluate_static( n, pattern_bits( 0b001u, 3 ) );
  EXPECT_EQ( r001.nodes.at( "cout" ).level, switch_level::weak0 );
  EXPECT_NEAR( r001.nodes.at( "cout" ).drop, vt, 1e-12 );
  for ( auto const* r : { &r110, &r001 } )
  {
    auto const w = std::find_if( r->weak.begin(), r->weak.end(), []( auto const& x ) { return x.net == "cout"; } );
    ASSERT_NE( w, r->weak.end() );
    EXPECT_FALSE( w->device.empty() );
    EXPECT_FALSE( w->contested_by.empty() );
  }
}

TEST( verify, all_cells_pass_exhaustively )
{
  for ( auto const& spec : all_cells() )
  {
    auto const n = build_cell( spec.name );
    auto const s = verify_truth_table( n );
    EXPECT_TRUE( s.passed ) << spec.label;
    EXPECT_EQ( s.failures, 0u );
    EXPECT_EQ( s.patterns.size(), spec.name == cell_name::xor_module ? 4u : 8u );
    for ( auto const& p : s.patterns )
      EXPECT_EQ( p.correct.size(), n.outputs().size() );
  }
}

TEST( verify, ccmos_outputs_are_strong )
{
  auto const n = build_ccmos();
  for ( unsigned p = 0; p < 8u; ++p )
  {
    auto const r = evaluate_static( n, pattern_bits( p, 3 ) );
    for ( auto const& o : n.outputs() )
      EXPECT_TRUE( r.nodes.at( o ).is_strong() ) << o << " at " << p << " = " << r.nodes.at( o ).to_string();
    EXPECT_TRUE( r.weak.empty() );
    for ( auto const& [net, v] : r.nodes )
      EXPECT_NE( v.level, switch_level::x ) << net << " at " << p;
  }
}

TEST( verify, cn10pfs_mutant_fails )
{
  auto mutant = build_cn10pfs();
  bool moved = false;
  for ( std::size_t i = 0; i < mutant.devices().size(); ++i )
    if ( mutant.devices()[i].id == "PPASS" )
    {
      mutant.device_at( i ).terminals[1] = "c";
      moved = true;
    }
  ASSERT_TRUE( moved );
  auto const s = verify_truth_table( mutant );
  EXPECT_FALSE( s.passed );
  EXPECT_GE( s.failures, 1u );
}

TEST( verify, logic_is_policy_invariant )
{
  for ( auto const& spec : all_cells() )
  {
    auto const a = build_cell( spec.name, diameter_policy::uniform( { 55u, 0u } ) );
    auto const b = build_cell( spec.name, diameter_policy::uniform( { 19u, 0u } ) );
    for ( unsigned p = 0; p < ( 1u << a.inputs().size() ); ++p )
    {
      auto const bits = pattern_bits( p, a.inputs().size() );
      auto const ra = evaluate_static( a, bits );
      auto const rb = evaluate_static( b, bits );
      for ( auto const& o : a.outputs() )
        EXPECT_EQ( ra.nodes.at( o ).logic(), rb.nodes.at( o ).logic() ) << spec.label << " " << o << " " << p;
    }
  }
}

TEST( evaluate, order_independent_under_device_permutation )
{
  std::mt19937 rng( 3 );
  for ( auto const& spec : all_cells() )
  {
    auto const base = build_cell( spec.name );
    for ( int trial = 0; trial < 5; ++trial )
    {
      auto devices = base.devices();
      std::shuffle( devices.begin(), devices.end(), rng );
      netlist shuffled( base.name() );
      for ( auto const& i : base.inputs() )
        shuffled.add_input( i );
      for ( auto const& o : base.outputs() )
        shuffled.add_output( o );
      for ( auto const& d : devices )
        shuffled.add( d );
      for ( unsigned p = 0; p < ( 1u << base.inputs().size() ); ++p )
      {
        auto const bits = pattern_bits( p, base.inputs().size() );
        EXPECT_EQ( evaluate_static( base, bits ).nodes, evaluate_static( shuffled, bits ).nodes ) << spec.label << " " << p;
      }
    }
  }
}

TEST( evaluate, drops_never_grow_with_diameter )
{
  std::vector<chirality_vector> const ladder{ { 10u, 0u }, { 13u, 0u }, { 19u, 0u }, { 28u, 0u }, { 37u, 0u }, { 55u, 0u }, { 100u, 0u } };
  for ( auto name : { cell_name::xor_module, cell_name::cn9p4g, cell_name::cn9p8gbuff, cell_name::cn10pfs, cell_name::cn8p10g } )
  {
    std::map<std::pair<unsigned, std::string>, double> previous;
    for ( auto const c : ladder )
    {
      auto const n = build_cell( name, diameter_policy::uniform( c ) );
      for ( unsigned p = 0; p < ( 1u << n.inputs().size() ); ++p )
        for ( auto const& [net, v] : evaluate_static( n, pattern_bits( p, n.inputs().size() ) ).nodes )
        {
          auto const key = std::pair{ p, net };
          if ( auto const it = previous.find( key ); it != previous.end() )
          {
            EXPECT_LE( v.drop, it->second + 1e-15 ) << spec_of( name ).label << " " << net << " " << p;
          }
          previous[key] = v.drop;
        }
    }
  }
}

TEST( evaluate, fighting_ring_resolves_to_conflict )
{
  netlist n( "ring" );
  n.add_input( "en" );
  n.add_output( "r0" );
  for ( int i = 0; i < 3; ++i )
  {
    auto const in = "r" + std::to_string( i );
    auto const out = "r" + std::to_string( ( i + 1 ) % 3 );
    n.add_transistor( "P" + std::to_string( i ), device_kind::pcnfet, out, in, "vdd" );
    n.add_transistor( "N" + std::to_string( i ), device_kind::ncnfet, out, in, "gnd" );
  }
  n.add_transistor( "PE", device_kind::pcnfet, "r0", "en", "vdd" );
  auto const kicked = evaluate_static( n, { false } );
  for ( auto const* net : { "r0", "r1", "r2" } )
    EXPECT_EQ( kicked.nodes.at( net ), switch_value::x() ) << net;
  auto const idle = evaluate_static( n, { true } );
  EXPECT_FALSE( idle.nodes.at( "r0" ).logic().has_value() );
}

TEST( evaluate, oscillation_error_names_nets )
{
  oscillation_error const e( { "q", "qb" } );
  EXPECT_EQ( e.nets(), ( std::vector<std::string>{ "q", "qb" } ) );
  EXPECT_NE( std::string( e.what() ).find( "q qb" ), std::string::npos );
}

TEST( swing, signatures_at_default_policy )
{
  auto const cn9 = swing_report( build_cn9p4g() );
  EXPECT_TRUE( cn9.output( "sum" ).full_swing );
  EXPECT_FALSE( cn9.output( "cout" ).full_swing );
  EXPECT_EQ( cn9.output( "cout" ).degraded_patterns, ( std::vector<std::string>{ "001", "110" } ) );
  for ( auto name : { cell_name::cn9p8gbuff, cell_name::cn10pfs, cell_name::cn8p10g, cell_name::ccmos, cell_name::tgcmos } )
    for ( auto const& o : swing_report( build_cell( name ) ).outputs )
      EXPECT_TRUE( o.full_swing ) << spec_of( name ).label << " " << o.net;
}

TEST( swing, buffer_restores_cn9p4g_carry_at_110 )
{
  EXPECT_EQ( evaluate_static( build_cn9p8gbuff(), pattern_bits( 0b110u, 3 ) ).nodes.at( "cout" ), switch_value::strong( true ) );
}

TEST( swing, cn10pfs_policy_contrast )
{
  switch_options opts;
  opts.vdd = 0.65;
  opts.epsilon = 0.2;
  auto const small = swing_report( build_cn10pfs( diameter_policy::uniform( { 19u, 0u } ) ), opts );
  auto const large = swing_report( build_cn10pfs( diameter_policy::uniform( { 55u, 0u } ) ), opts );
  EXPECT_TRUE( std::any_of( small.outputs.begin(), small.outputs.end(), []( auto const& o ) { return !o.full_swing; } ) );
  for ( auto const& o : large.outputs )
  {
    EXPECT_TRUE( o.full_swing ) << o.net;
    EXPECT_LE( o.worst_drop, 0.13 );
  }
  EXPECT_NEAR( small.output( "cout" ).worst_drop, 0.2855, 1e-4 );
}

TEST( swing, settled_classification_uses_residuals )
{
  auto const n = build_cn9p4g();
  residual_table r;
  for ( unsigned p = 0; p < 8u; ++p )
  {
    r[{ p, "sum" }] = 0.001;
    r[{ p, "cout" }] = p == 0b110u ? 0.2 : 0.001;
  }
  auto const c = swing_report( n, {}, &r );
  ASSERT_TRUE( c.output( "sum" ).settled_full_swing.has_value() );
  EXPECT_TRUE( *c.output( "sum" ).settled_full_swing );
  EXPECT_FALSE( *c.output( "cout" ).settled_full_swing );
  EXPECT_EQ( c.output( "cout" ).worst_residual_pattern, "110" );
  EXPECT_EQ( c.output( "cout" ).settled_degraded_patterns, ( std::vector<std::string>{ "110" } ) );
}

TEST( swing, rejects_bad_epsilon )
{
  switch_options o;
  o.epsilon = 0.5;
  EXPECT_THROW( swing_report( build_xor_cell(), o ), invalid_argument );
  o.epsilon = 0.0;
  EXPECT_THROW( swing_report( build_xor_cell(), o ), invalid_argument );
}

TEST( swing, reports_render )
{
  auto const c = swing_report( build_cn9p4g() );
  auto const text = format_swing_text( c );
  EXPECT_NE( text.find( "Degraded" ), std::string::npos );
  auto const csv = format_swing_csv( c );
  EXPECT_EQ( std::count( csv.begin(), csv.end(), '\n' ), 3 );
}
