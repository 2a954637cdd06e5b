#include <gtest/gtest.h>

#include <cmath>

#include <cnfa/harness.hpp>
#include <cnfa/report.hpp>

using namespace cnfa;

namespace
{

std::size_t count_status( std::vector<characterization_record> const& records, std::string const& status )
{
  return static_cast<std::size_t>(
      std::count_if( records.begin(), records.end(), [&]( auto const& r ) { return r.status == status; } ) );
}

sweep_options threads( unsigned n )
{
  sweep_options o;
  o.threads = n;
  return o;
}

} // namespace

TEST( plan, single_point )
{
  sweep_plan p;
  p.cells = { "CN10PFS" };
  EXPECT_EQ( p.points(), 1u );
  auto const r = run_sweep( p, threads( 1 ) );
  ASSERT_EQ( r.size(), 1u );
  EXPECT_EQ( r[0].cell, "CN10PFS" );
  EXPECT_EQ( r[0].status, "ok" );
  EXPECT_EQ( r[0].source, record_source::simulated );
  EXPECT_EQ( r[0].pdp, r[0].delay * r[0].power );
}

TEST( plan, cartesian_cardinality_and_order )
{
  sweep_plan p;
  p.cells = { "CN8P10G", "CCMOS", "CN9P4G", "TG-CMOS" };
  p.vdd = { 0.8, 0.5, 0.65 };
  EXPECT_EQ( p.points(), 12u );
  auto const r = run_sweep( p, threads( 2 ) );
  ASSERT_EQ( r.size(), 12u );
  EXPECT_TRUE( std::is_sorted( r.begin(), r.end(), record_order ) );
  EXPECT_EQ( count_status( r, "ok" ), 12u );
  EXPECT_EQ( r.front().cell, "CCMOS" );
  EXPECT_EQ( r.front().vdd, 0.5 );
}

TEST( plan, reference_only_designs_become_unavailable_rows )
{
  sweep_plan p;
  for ( auto const& spec : all_cells() )
    p.cells.push_back( std::string( spec.label ) );
  p.cells.push_back( "CNT-FA1" );
  p.cells.push_back( "CNT-FA2" );
  p.vdd = default_vdd_grid();
  auto const r = run_sweep( p );
  ASSERT_EQ( r.size(), 27u );
  EXPECT_EQ( count_status( r, "ok" ), 21u );
  EXPECT_EQ( count_status( r, "unavailable" ), 6u );
  for ( auto const& x : r )
    if ( x.status == "unavailable" )
    {
      EXPECT_EQ( x.source, record_source::reference );
      EXPECT_EQ( x.pdp, find_reference( x.cell, x.vdd )->pdp );
    }
}

TEST( plan, published_comparison_points )
{
  auto const p = sweep_plan::table2();
  EXPECT_EQ( p.points(), 27u );
  auto const r = run_sweep( p );
  ASSERT_EQ( r.size(), 27u );
  EXPECT_EQ( count_status( r, "ok" ), 18u );
  EXPECT_EQ( count_status( r, "unavailable" ), 9u );
}

TEST( plan, sweeps_are_reproducible_across_thread_counts )
{
  sweep_plan p;
  p.cells = { "CN9P4G", "CN10PFS" };
  p.vdd = { 0.5, 0.8 };
  auto const one = emit_csv( run_sweep( p, threads( 1 ) ) );
  auto const two = emit_csv( run_sweep( p, threads( 2 ) ) );
  EXPECT_EQ( one, two );
  EXPECT_EQ( one, emit_csv( run_sweep( p, threads( 1 ) ) ) );
}

TEST( plan, parses_lists_ranges_and_suffixes )
{
  auto const p = parse_sweep_plan( "# load sweep\n"
                                   "cells = CN8P10G, CCMOS\n"
                                   "cload = 1.4:0.5:4.9\n"
                                   "freq = 250, 0.5GHz\n"
                                   "temp = 25\n"
                                   "policy = 19,0\n" );
  EXPECT_EQ( p.cells, ( std::vector<std::string>{ "CN8P10G", "CCMOS" } ) );
  ASSERT_EQ( p.cload.size(), 8u );
  EXPECT_NEAR( p.cload.front(), 1.4e-15, 1e-24 );
  EXPECT_NEAR( p.cload.back(), 4.9e-15, 1e-24 );
  EXPECT_EQ( p.frequency, ( std::vector<double>{ 250e6, 0.5e9 } ) );
  EXPECT_EQ( p.policy, ( chirality_vector{ 19u, 0u } ) );
  EXPECT_EQ( p.points(), 2u * 8u * 2u );
}

TEST( plan, rejects_malformed_plans )
{
  EXPECT_THROW( parse_sweep_plan( "cells = NOPE\n" ), parse_error );
  EXPECT_THROW( parse_sweep_plan( "cells = CCMOS\nspeed = 3\n" ), parse_error );
  EXPECT_THROW( parse_sweep_plan( "cells = CCMOS\nvdd = -1\n" ), parse_error );
  EXPECT_THROW( parse_sweep_plan( "cells = CCMOS\npolicy = 9,0\n" ), parse_error );
  EXPECT_THROW( parse_sweep_plan( "vdd = 0.5\n" ), parse_error );
  try
  {
    parse_sweep_plan( "cells = CCMOS\n\nbogus = 1\n" );
    FAIL();
  }
  catch ( parse_error const& e )
  {
    EXPECT_EQ( e.line(), 3u );
  }
}

TEST( plan, default_grids )
{
  EXPECT_EQ( default_cload_grid().size(), 8u );
  EXPECT_NEAR( default_cload_grid().front(), 1.4e-15, 1e-24 );
  EXPECT_EQ( default_frequency_grid().size(), 4u );
  EXPECT_EQ( default_temperature_grid().size(), 4u );
  EXPECT_EQ( default_vdd_grid(), ( std::vector<double>{ 0.5, 0.65, 0.8 } ) );
}

TEST( characterize, failures_become_rows )
{
  operating_point op;
  op.frequency = 1e15;
  auto const r = characterize( cell_name::ccmos, op, { 55u, 0u } );
  EXPECT_EQ( r.status, "failed" );
  EXPECT_FALSE( r.reason.empty() );
  EXPECT_TRUE( std::isnan( r.pdp ) );
}

TEST( improvement, properties )
{
  EXPECT_DOUBLE_EQ( improvement( 1.0, 1.0 ), 0.0 );
  EXPECT_DOUBLE_EQ( improvement( 1.0, 4.0 ), 0.75 );
  EXPECT_LT( improvement( 2.0, 1.0 ), 0.0 );
  for ( double a : { 0.1, 0.5, 2.0 } )
    for ( double b : { 0.2, 1.0, 3.0 } )
    {
      EXPECT_LT( improvement( a, b ), 1.0 );
      EXPECT_NEAR( improvement( a * 7.0, b * 7.0 ), improvement( a, b ), 1e-12 ) << "scale invariant";
      EXPECT_EQ( improvement( a, b ) > 0.0, a < b );
    }
  EXPECT_THROW( improvement( 0.0, 1.0 ), invalid_argument );
  EXPECT_THROW( improvement( 1.0, -1.0 ), invalid_argument );
}

TEST( reference, table_values )
{
  auto const rows = load_reference_table();
  EXPECT_EQ( rows.size(), 27u );
  auto const cn9 = find_reference( "CN9P4G", 0.5 );
  ASSERT_TRUE( cn9.has_value() );
  EXPECT_NEAR( cn9->delay, 4.0743e-11, 1e-20 );
  auto const tg = find_reference( "TG-CMOS", 0.8 );
  ASSERT_TRUE( tg.has_value() );
  EXPECT_NEAR( tg->power, 7.6154e-7, 1e-16 );
  EXPECT_FALSE( find_reference( "CN8P10G", 0.7 ).has_value() );
  for ( auto const& r : rows )
  {
    EXPECT_EQ( r.source, record_source::reference );
    EXPECT_EQ( r.cload, reference_cload );
  }
}

TEST( reference, published_claims_follow_from_the_table )
{
  for ( auto const& c : published_claims )
  {
    auto const a = find_reference( c.cell, c.vdd );
    auto const b = find_reference( c.reference, c.vdd );
    ASSERT_TRUE( a && b ) << c.reference;
    EXPECT_NEAR( 100.0 * improvement( a->pdp, b->pdp ), c.percent, 0.1 ) << c.cell << " vs " << c.reference;
  }
}

TEST( reference, inconsistent_rows_are_the_factor_of_ten_cases )
{
  auto const bad = inconsistent_reference_rows();
  std::vector<std::pair<std::string, double>> got;
  for ( auto const& r : bad )
  {
    got.push_back( { r.cell, r.vdd } );
    EXPECT_NEAR( r.delay * r.power / r.pdp, 10.0, 0.2 ) << r.cell;
  }
  EXPECT_EQ( got, ( std::vector<std::pair<std::string, double>>{ { "CMOS-Bridge", 0.8 }, { "CCMOS", 0.8 }, { "TG-CMOS", 0.8 } } ) );
  for ( auto const& r : load_reference_table() )
  {
    if ( std::find( got.begin(), got.end(), std::pair{ r.cell, r.vdd } ) == got.end() )
    {
      EXPECT_LE( pdp_mismatch( r ), 0.02 ) << r.cell << " " << r.vdd;
    }
  }
}
