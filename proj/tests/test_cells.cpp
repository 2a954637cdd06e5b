#include <gtest/gtest.h>

#include <set>

#include <cnfa/cells.hpp>
#include <cnfa/switch_level.hpp>
#include <cnfa/validate.hpp>

using namespace cnfa;

TEST( truth, full_adder_examples )
{
  EXPECT_EQ( full_adder_truth( false, false, false ), ( adder_bits{ false, false } ) );
  EXPECT_EQ( full_adder_truth( true, true, true ), ( adder_bits{ true, true } ) );
  EXPECT_EQ( full_adder_truth( true, false, true ), ( adder_bits{ false, true } ) );
}

TEST( truth, majority_matches_carry_on_all_patterns )
{
  EXPECT_TRUE( majority3( true, true, false ) );
  EXPECT_FALSE( majority3( false, false, true ) );
  for ( unsigned p = 0; p < 8u; ++p )
  {
    bool const a = p & 4u, b = p & 2u, c = p & 1u;
    EXPECT_EQ( majority3( a, b, c ), full_adder_truth( a, b, c ).cout );
    EXPECT_EQ( full_adder_truth( a, b, c ).sum, ( ( a + b + c ) % 2 ) == 1 );
    EXPECT_EQ( full_adder_truth( a, b, c ).cout, ( a + b + c ) >= 2 );
  }
}

TEST( cells, declared_counts_and_ports )
{
  std::map<std::string, int> const expected{ { "XOR_MODULE", 4 }, { "CN9P4G", 13 }, { "CN9P8GBUFF", 17 }, { "CN10PFS", 10 },
                                             { "CN8P10G", 18 },   { "CCMOS", 28 },  { "TGCMOS", 20 } };
  ASSERT_EQ( all_cells().size(), expected.size() );
  for ( auto const& spec : all_cells() )
  {
    auto const n = build_cell( spec.name );
    EXPECT_EQ( spec.declared_count, expected.at( std::string( spec.label ) ) );
    EXPECT_EQ( n.declared_count(), spec.declared_count );
    EXPECT_EQ( static_cast<int>( n.transistor_count() ), spec.declared_count ) << spec.label;
    EXPECT_EQ( n.inputs(), spec.inputs );
    EXPECT_EQ( n.outputs(), spec.outputs );
  }
}

TEST( cells, lookup_by_name )
{
  EXPECT_EQ( find_cell( "TG-CMOS" ), cell_name::tgcmos );
  EXPECT_EQ( find_cell( "cn8p10g" ), cell_name::cn8p10g );
  EXPECT_EQ( find_cell( "xor" ), cell_name::xor_module );
  EXPECT_FALSE( find_cell( "CMOS-Bridge" ).has_value() );
}

TEST( cells, proposed_cells_use_the_policy_everywhere )
{
  for ( auto name : { cell_name::xor_module, cell_name::cn9p4g, cell_name::cn9p8gbuff, cell_name::cn10pfs, cell_name::cn8p10g } )
  {
    for ( auto const& d : build_cell( name ).devices() )
    {
      ASSERT_TRUE( is_cnfet( d.kind ) ) << d.id;
      EXPECT_EQ( d.chirality, ( chirality_vector{ 55u, 0u } ) ) << d.id;
    }
    for ( auto const& d : build_cell( name, diameter_policy::uniform( { 19u, 0u } ) ).devices() )
      EXPECT_EQ( d.chirality, ( chirality_vector{ 19u, 0u } ) ) << d.id;
  }
}

TEST( cells, reference_cells_are_mos_with_two_to_one_sizing )
{
  for ( auto name : { cell_name::ccmos, cell_name::tgcmos } )
    for ( auto const& d : build_cell( name ).devices() )
    {
      ASSERT_TRUE( d.kind == device_kind::nmos || d.kind == device_kind::pmos ) << d.id;
      EXPECT_DOUBLE_EQ( d.w, d.kind == device_kind::pmos ? 128e-9 : 64e-9 ) << d.id;
    }
}

TEST( cells, xor_module_uses_no_inverted_inputs )
{
  auto const n = build_xor_cell();
  ASSERT_EQ( n.transistor_count(), 4u );
  std::set<std::string> gates;
  for ( auto const& d : n.devices() )
    gates.insert( d.gate() );
  EXPECT_EQ( gates, ( std::set<std::string>{ "a", "b" } ) );
  int p = 0, nn = 0;
  for ( auto const& d : n.devices() )
    ( d.kind == device_kind::pcnfet ? p : nn )++;
  EXPECT_EQ( p, 2 );
  EXPECT_EQ( nn, 2 );
}

TEST( cells, policy_changes_only_ratings )
{
  for ( auto const& spec : all_cells() )
  {
    auto const a = build_cell( spec.name, diameter_policy::uniform( { 55u, 0u } ) );
    auto const b = build_cell( spec.name, diameter_policy::uniform( { 19u, 0u } ) );
    ASSERT_EQ( a.devices().size(), b.devices().size() );
    for ( std::size_t i = 0; i < a.devices().size(); ++i )
    {
      EXPECT_EQ( a.devices()[i].id, b.devices()[i].id );
      EXPECT_EQ( a.devices()[i].kind, b.devices()[i].kind );
      EXPECT_EQ( a.devices()[i].terminals, b.devices()[i].terminals );
    }
  }
}

TEST( cells, cn9p8gbuff_is_cn9p4g_plus_four )
{
  auto const base = build_cn9p4g();
  auto const buffered = build_cn9p8gbuff();
  EXPECT_EQ( buffered.transistor_count(), base.transistor_count() + 4u );
}

TEST( cells, cn8p10g_modules_share_only_inputs_and_rails )
{
  auto const sum = build_cn8p10g_sum_module();
  auto const cout = build_cn8p10g_cout_module();
  EXPECT_EQ( sum.transistor_count(), 8u );
  EXPECT_EQ( cout.transistor_count(), 10u );
  std::set<std::string> sum_nets, cout_nets;
  for ( auto const& d : sum.devices() )
    sum_nets.insert( d.terminals.begin(), d.terminals.end() );
  for ( auto const& d : cout.devices() )
    cout_nets.insert( d.terminals.begin(), d.terminals.end() );
  std::set<std::string> const allowed{ "a", "b", "c", "vdd", "gnd" };
  for ( auto const& net : sum_nets )
  {
    if ( cout_nets.count( net ) )
    {
      EXPECT_TRUE( allowed.count( net ) ) << "shared internal net " << net;
    }
  }
  EXPECT_TRUE( validate_netlist( sum ).clean() );
  EXPECT_TRUE( validate_netlist( cout ).clean() );
}

TEST( cells, cn8p10g_modules_are_independent )
{
  auto const full = build_cn8p10g();
  auto const sum = build_cn8p10g_sum_module();
  auto const cout = build_cn8p10g_cout_module();
  for ( unsigned p = 0; p < 8u; ++p )
  {
    auto const bits = pattern_bits( p, 3 );
    auto const rf = evaluate_static( full, bits );
    EXPECT_EQ( rf.nodes.at( "sum" ), evaluate_static( sum, bits ).nodes.at( "sum" ) ) << p;
    EXPECT_EQ( rf.nodes.at( "cout" ), evaluate_static( cout, bits ).nodes.at( "cout" ) ) << p;
  }
}

TEST( cells, cn8p10g_cout_module_is_majority )
{
  auto const m = build_cn8p10g_cout_module();
  EXPECT_TRUE( verify_truth_table( m ).passed );
  for ( unsigned p = 0; p < 8u; ++p )
  {
    auto const bits = pattern_bits( p, 3 );
    auto const v = evaluate_static( m, bits ).nodes.at( "cout" );
    ASSERT_TRUE( v.logic().has_value() );
    EXPECT_EQ( *v.logic(), majority3( bits[0], bits[1], bits[2] ) );
    EXPECT_TRUE( v.is_strong() ) << "buffered majority output is restored";
  }
}

TEST( cells, expected_outputs_follow_the_oracle )
{
  EXPECT_EQ( expected_outputs( cell_name::xor_module, { true, false } ), ( std::vector<bool>{ true } ) );
  EXPECT_EQ( expected_outputs( cell_name::cn10pfs, { true, false, true } ), ( std::vector<bool>{ false, true } ) );
}
