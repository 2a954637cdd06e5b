#include <gtest/gtest.h>

#include <random>

#include <cnfa/cells.hpp>
#include <cnfa/harness.hpp>
#include <cnfa/netlist_io.hpp>
#include <cnfa/params_file.hpp>

using namespace cnfa;

namespace
{

std::string random_bytes( std::mt19937_64& rng, std::size_t max_len )
{
  std::uniform_int_distribution<std::size_t> len( 0, max_len );
  std::uniform_int_distribution<int> byte( 0, 255 );
  std::string s( len( rng ), '\0' );
  for ( auto& c : s )
    c = static_cast<char>( byte( rng ) );
  return s;
}

/* Bytes drawn from the netlist alphabet so that more inputs get past the lexer. */
std::string random_tokens( std::mt19937_64& rng, std::size_t max_len )
{
  static constexpr char alphabet[] = "MNCPV+*.;()=, \n\t0123456789eEfpnumkgGxX-abcdgndvdCNFETPMOSchiralitytubeswl";
  std::uniform_int_distribution<std::size_t> len( 0, max_len ), pick( 0, sizeof alphabet - 2 );
  std::string s( len( rng ), ' ' );
  for ( auto& c : s )
    c = alphabet[pick( rng )];
  return s;
}

std::string mutate( std::string text, std::mt19937_64& rng )
{
  std::uniform_int_distribution<int> op( 0, 3 ), byte( 0, 255 );
  std::uniform_int_distribution<std::size_t> count( 1, 8 );
  for ( auto k = count( rng ); k > 0 && !text.empty(); --k )
  {
    std::uniform_int_distribution<std::size_t> at( 0, text.size() - 1 );
    switch ( op( rng ) )
    {
    case 0: text[at( rng )] = static_cast<char>( byte( rng ) ); break;
    case 1: text.erase( at( rng ), 1 ); break;
    case 2: text.insert( at( rng ), 1, static_cast<char>( byte( rng ) ) ); break;
    default:
    {
      auto const a = at( rng ), b = at( rng );
      std::swap( text[a], text[b] );
    }
    }
  }
  return text;
}

/* Parse must either fail with a positioned diagnostic or yield a netlist that round-trips. */
void check_netlist_text( std::string const& text )
{
  auto const r = try_parse_netlist( text );
  if ( auto const* e = std::get_if<parse_error>( &r ) )
  {
    EXPECT_GE( e->line(), 1u );
    return;
  }
  auto const& n = std::get<netlist>( r );
  auto const again = try_parse_netlist( emit_netlist( n ) );
  ASSERT_TRUE( std::holds_alternative<netlist>( again ) ) << emit_netlist( n );
  EXPECT_TRUE( structurally_equal( n, std::get<netlist>( again ) ) );
}

} // namespace

TEST( fuzz, random_bytes_never_crash_the_netlist_parser )
{
  std::mt19937_64 rng( 20261015 );
  for ( int i = 0; i < 100000; ++i )
    check_netlist_text( random_bytes( rng, 96 ) );
}

TEST( fuzz, random_token_soup )
{
  std::mt19937_64 rng( 7 );
  for ( int i = 0; i < 50000; ++i )
    check_netlist_text( random_tokens( rng, 160 ) );
}

TEST( fuzz, mutated_cell_netlists )
{
  std::mt19937_64 rng( 99 );
  std::vector<std::string> seeds;
  for ( auto const& spec : all_cells() )
    seeds.push_back( emit_netlist( build_cell( spec.name ) ) );
  for ( int i = 0; i < 20000; ++i )
    check_netlist_text( mutate( seeds[static_cast<std::size_t>( i ) % seeds.size()], rng ) );
}

TEST( fuzz, parameter_and_plan_files )
{
  std::mt19937_64 rng( 5 );
  auto const params = emit_model_params( {} );
  std::string const plan = "cells = CN8P10G, CCMOS\ncload = 1.4:0.5:4.9\nfreq = 250\npolicy = 19,0\n";
  for ( int i = 0; i < 20000; ++i )
  {
    try
    {
      auto const m = parse_model_params( mutate( params, rng ) );
      EXPECT_EQ( parse_model_params( emit_model_params( m ) ), m );
    }
    catch ( parse_error const& )
    {
    }
    try
    {
      auto const p = parse_sweep_plan( mutate( plan, rng ) );
      EXPECT_FALSE( p.cells.empty() );
    }
    catch ( parse_error const& )
    {
    }
  }
}
