#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "device_physics.hpp"
#include "error.hpp"
#include "netlist.hpp"

namespace cnfa
{

/*! \brief Sum and carry of a one-bit full adder: a^b^c and ab + c(a^b). */
struct adder_bits
{
  bool sum = false;
  bool cout = false;

  friend bool operator==( adder_bits const&, adder_bits const& ) = default;
};

constexpr adder_bits full_adder_truth( bool a, bool b, bool c ) noexcept
{
  bool const p = a != b;
  return { p != c, ( a && b ) || ( c && p ) };
}

constexpr bool majority3( bool a, bool b, bool c ) noexcept
{
  return ( a && b ) || ( a && c ) || ( b && c );
}

/*! \brief Chirality assignment for the CNFETs of a cell.
 *
 * Every device uses `base` unless its id appears in `overrides`.
 */
struct diameter_policy
{
  chirality_vector base{ 55u, 0u };
  std::map<std::string, chirality_vector> overrides;

  chirality_vector for_device( std::string const& id ) const
  {
    auto const it = overrides.find( id );
    return it == overrides.end() ? base : it->second;
  }

  static diameter_policy uniform( chirality_vector c ) { return { c, {} }; }
};

enum class cell_name
{
  xor_module,
  cn9p4g,
  cn9p8gbuff,
  cn10pfs,
  cn8p10g,
  ccmos,
  tgcmos
};

struct cell_spec
{
  cell_name name;
  std::string_view label;
  int declared_count;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  bool cnfet = true;
};

inline std::vector<cell_spec> const& all_cells()
{
  static std::vector<cell_spec> const cells = {
      { cell_name::xor_module, "XOR_MODULE", 4, { "a", "b" }, { "out" }, true },
      { cell_name::cn9p4g, "CN9P4G", 13, { "a", "b", "c" }, { "sum", "cout" }, true },
      { cell_name::cn9p8gbuff, "CN9P8GBUFF", 17, { "a", "b", "c" }, { "sum", "cout" }, true },
      { cell_name::cn10pfs, "CN10PFS", 10, { "a", "b", "c" }, { "sum", "cout" }, true },
      { cell_name::cn8p10g, "CN8P10G", 18, { "a", "b", "c" }, { "sum", "cout" }, true },
      { cell_name::ccmos, "CCMOS", 28, { "a", "b", "c" }, { "sum", "cout" }, false },
      { cell_name::tgcmos, "TGCMOS", 20, { "a", "b", "c" }, { "sum", "cout" }, false },
  };
  return cells;
}

inline cell_spec const& spec_of( cell_name name )
{
  for ( auto const& c : all_cells() )
    if ( c.name == name )
      return c;
  throw invalid_argument( "unknown cell" );
}

/*! \brief Upper-case name with `-` and `_` removed; `TG-CMOS` and `TGCMOS` compare equal. */
inline std::string normalized_cell_key( std::string_view name )
{
  std::string out;
  for ( char c : name )
    if ( c != '-' && c != '_' && c != ' ' )
      out.push_back( static_cast<char>( std::toupper( static_cast<unsigned char>( c ) ) ) );
  return out;
}

inline std::optional<cell_name> find_cell( std::string_view name )
{
  auto const key = normalized_cell_key( name );
  for ( auto const& c : all_cells() )
    if ( normalized_cell_key( c.label ) == key )
      return c.name;
  if ( key == "XOR" )
    return cell_name::xor_module;
  return std::nullopt;
}

namespace detail
{

class cell_builder
{
public:
  cell_builder( netlist& n, diameter_policy const& policy ) : n_( n ), policy_( policy ) {}

  void nfet( std::string id, std::string_view d, std::string_view g, std::string_view s )
  {
    auto const c = policy_.for_device( id );
    n_.add_transistor( std::move( id ), device_kind::ncnfet, d, g, s, c );
  }

  void pfet( std::string id, std::string_view d, std::string_view g, std::string_view s )
  {
    auto const c = policy_.for_device( id );
    n_.add_transistor( std::move( id ), device_kind::pcnfet, d, g, s, c );
  }

  void inverter( std::string const& prefix, std::string_view in, std::string_view out )
  {
    pfet( prefix + "P", out, in, vdd_net );
    nfet( prefix + "N", out, in, gnd_net );
  }

  /* Two P pass devices cover 00, 01, 10 and a series N pull-down covers 11.
     Neither input is inverted. */
  void xor_module( std::string const& prefix, std::string_view a, std::string_view b, std::string_view out )
  {
    auto const mid = prefix + "m";
    pfet( prefix + "P1", out, a, b );
    pfet( prefix + "P2", out, b, a );
    nfet( prefix + "N1", out, a, mid );
    nfet( prefix + "N2", mid, b, gnd_net );
  }

private:
  netlist& n_;
  diameter_policy const& policy_;
};

inline netlist start_cell( cell_name name )
{
  auto const& spec = spec_of( name );
  netlist n( std::string( spec.label ) );
  for ( auto const& i : spec.inputs )
    n.add_input( i );
  for ( auto const& o : spec.outputs )
    n.add_output( o );
  n.set_declared_count( spec.declared_count );
  return n;
}

/* Sum = (a ^ b) ^ c from two chained XOR modules; the first stage's output is net `x`. */
inline void sum_path( cell_builder& b )
{
  b.xor_module( "X1_", "a", "b", "x" );
  b.xor_module( "X2_", "x", "c", "sum" );
}

/* Carry stage shared by CN9P4G and CN9P8GBUFF, driving `out`:
   an N pass device forwards C while x = a^b is high, a series N pair from vdd
   makes the 11 case and a series P pair to gnd makes the 00 case. */
inline void cn9p4g_carry( cell_builder& b, std::string_view out )
{
  b.nfet( "NPASS", out, "x", "c" );
  b.nfet( "NA", "vdd", "a", "cn" );
  b.nfet( "NB", "cn", "b", out );
  b.pfet( "PA", "cp", "a", "gnd" );
  b.pfet( "PB", out, "b", "cp" );
}

} // namespace detail

/*! \brief Appends one XOR module (4 devices) to `n`; internal nets carry `prefix`. */
inline void build_xor_module( netlist& n, std::string_view a_net, std::string_view b_net, std::string_view out_net,
                              diameter_policy const& policy = {}, std::string const& prefix = "X_" )
{
  if ( a_net == b_net || a_net == out_net || b_net == out_net )
    throw invalid_argument( "xor module nets must be distinct" );
  detail::cell_builder b( n, policy );
  b.xor_module( prefix, a_net, b_net, out_net );
}

inline netlist build_xor_cell( diameter_policy const& policy = {} )
{
  auto n = detail::start_cell( cell_name::xor_module );
  build_xor_module( n, "a", "b", "out", policy, "" );
  return n;
}

/*! \brief CN9P4G: 8-device sum path plus a 5-device carry stage. */
inline netlist build_cn9p4g( diameter_policy const& policy = {} )
{
  auto n = detail::start_cell( cell_name::cn9p4g );
  detail::cell_builder b( n, policy );
  detail::sum_path( b );
  detail::cn9p4g_carry( b, "cout" );
  return n;
}

/*! \brief CN9P8GBUFF: CN9P4G with a two-inverter buffer restoring Cout. */
inline netlist build_cn9p8gbuff( diameter_policy const& policy = {} )
{
  auto n = detail::start_cell( cell_name::cn9p8gbuff );
  detail::cell_builder b( n, policy );
  detail::sum_path( b );
  detail::cn9p4g_carry( b, "co" );
  b.inverter( "BUF1_", "co", "con" );
  b.inverter( "BUF2_", "con", "cout" );
  return n;
}

/*! \brief CN10PFS: Cout = C(a^b) + A(a xnor b) from one N and one P pass device gated by x. */
inline netlist build_cn10pfs( diameter_policy const& policy = {} )
{
  auto n = detail::start_cell( cell_name::cn10pfs );
  detail::cell_builder b( n, policy );
  detail::sum_path( b );
  b.nfet( "NPASS", "cout", "x", "c" );
  b.pfet( "PPASS", "cout", "x", "a" );
  return n;
}

/*! \brief CN8P10G: independent sum and majority-carry modules.
 *
 * The carry module recomputes a^b locally (net `y`), selects C or A with a
 * pass pair and restores the level with a two-inverter buffer.
 * Device ids of the carry module start with `K`.
 */
inline netlist build_cn8p10g( diameter_policy const& policy = {} )
{
  auto n = detail::start_cell( cell_name::cn8p10g );
  detail::cell_builder b( n, policy );
  detail::sum_path( b );
  b.xor_module( "K1_", "a", "b", "y" );
  b.nfet( "KNPASS", "km", "y", "c" );
  b.pfet( "KPPASS", "km", "y", "a" );
  b.inverter( "KBUF1_", "km", "kmn" );
  b.inverter( "KBUF2_", "kmn", "cout" );
  return n;
}

/*! \brief The CN8P10G carry module alone: inputs a, b, c and output cout (10 devices). */
inline netlist build_cn8p10g_cout_module( diameter_policy const& policy = {} )
{
  auto full = build_cn8p10g( policy );
  full.remove_devices( { "X1_P1", "X1_P2", "X1_N1", "X1_N2", "X2_P1", "X2_P2", "X2_N1", "X2_N2" } );
  netlist n( "CN8P10G_COUT" );
  for ( auto const& i : { "a", "b", "c" } )
    n.add_input( i );
  n.add_output( "cout" );
  n.set_declared_count( 10 );
  n.merge( full );
  return n;
}

/*! \brief The CN8P10G sum module alone: inputs a, b, c and output sum (8 devices). */
inline netlist build_cn8p10g_sum_module( diameter_policy const& policy = {} )
{
  netlist n( "CN8P10G_SUM" );
  for ( auto const& i : { "a", "b", "c" } )
    n.add_input( i );
  n.add_output( "sum" );
  n.set_declared_count( 8 );
  detail::cell_builder b( n, policy );
  detail::sum_path( b );
  return n;
}

/*! \brief 28-transistor static CMOS mirror adder with output inverters. */
inline netlist build_ccmos( mos_model_params const& mos = {} )
{
  auto n = detail::start_cell( cell_name::ccmos );
  double const wn = mos.default_w_n;
  double const wp = 2.0 * mos.default_w_n;
  double const l = mos.default_l;
  auto p = [&]( std::string id, std::string_view d, std::string_view g, std::string_view s ) {
    n.add_mos( std::move( id ), device_kind::pmos, d, g, s, wp, l );
  };
  auto nn = [&]( std::string id, std::string_view d, std::string_view g, std::string_view s ) {
    n.add_mos( std::move( id ), device_kind::nmos, d, g, s, wn, l );
  };
  // carry: coutb = !(ab + c(a + b))
  p( "MP1", "n1", "a", "vdd" );
  p( "MP2", "n1", "b", "vdd" );
  p( "MP3", "coutb", "c", "n1" );
  p( "MP4", "n2", "a", "vdd" );
  p( "MP5", "coutb", "b", "n2" );
  nn( "MN1", "n3", "a", "gnd" );
  nn( "MN2", "n3", "b", "gnd" );
  nn( "MN3", "coutb", "c", "n3" );
  nn( "MN4", "n4", "a", "gnd" );
  nn( "MN5", "coutb", "b", "n4" );
  // sum: sumb = !(abc + coutb(a + b + c))
  p( "MP6", "n5", "a", "vdd" );
  p( "MP7", "n5", "b", "vdd" );
  p( "MP8", "n5", "c", "vdd" );
  p( "MP9", "sumb", "coutb", "n5" );
  p( "MP10", "n6", "a", "vdd" );
  p( "MP11", "n7", "b", "n6" );
  p( "MP12", "sumb", "c", "n7" );
  nn( "MN6", "n8", "a", "gnd" );
  nn( "MN7", "n8", "b", "gnd" );
  nn( "MN8", "n8", "c", "gnd" );
  nn( "MN9", "sumb", "coutb", "n8" );
  nn( "MN10", "n9", "a", "gnd" );
  nn( "MN11", "n10", "b", "n9" );
  nn( "MN12", "sumb", "c", "n10" );
  // output inverters
  p( "MP13", "sum", "sumb", "vdd" );
  nn( "MN13", "sum", "sumb", "gnd" );
  p( "MP14", "cout", "coutb", "vdd" );
  nn( "MN14", "cout", "coutb", "gnd" );
  return n;
}

/*! \brief 20-transistor transmission-gate adder: TG XOR, then TG multiplexers for Sum and Cout. */
inline netlist build_tgcmos( mos_model_params const& mos = {} )
{
  auto n = detail::start_cell( cell_name::tgcmos );
  double const wn = mos.default_w_n;
  double const wp = 2.0 * mos.default_w_n;
  double const l = mos.default_l;
  auto inv = [&]( std::string const& id, std::string_view in, std::string_view out ) {
    n.add_mos( id + "P", device_kind::pmos, out, in, "vdd", wp, l );
    n.add_mos( id + "N", device_kind::nmos, out, in, "gnd", wn, l );
  };
  // conducts between x and y when `on` is high and `off` is low
  auto tg = [&]( std::string const& id, std::string_view x, std::string_view y, std::string_view on, std::string_view off ) {
    n.add_mos( id + "N", device_kind::nmos, y, on, x, wn, l );
    n.add_mos( id + "P", device_kind::pmos, y, off, x, wp, l );
  };
  inv( "IA", "a", "an" );
  inv( "IB", "b", "bn" );
  tg( "T1", "a", "x", "bn", "b" );   // b = 0: x = a
  tg( "T2", "an", "x", "b", "bn" );  // b = 1: x = !a
  inv( "IX", "x", "xn" );
  inv( "IC", "c", "cn" );
  tg( "T3", "c", "sum", "xn", "x" ); // x = 0: sum = c
  tg( "T4", "cn", "sum", "x", "xn" ); // x = 1: sum = !c
  tg( "T5", "a", "cout", "xn", "x" ); // x = 0: cout = a
  tg( "T6", "c", "cout", "x", "xn" ); // x = 1: cout = c
  return n;
}

/*! \brief Builds any built-in cell. MOS cells ignore the diameter policy. */
inline netlist build_cell( cell_name name, diameter_policy const& policy = {}, mos_model_params const& mos = {} )
{
  switch ( name )
  {
  case cell_name::xor_module: return build_xor_cell( policy );
  case cell_name::cn9p4g: return build_cn9p4g( policy );
  case cell_name::cn9p8gbuff: return build_cn9p8gbuff( policy );
  case cell_name::cn10pfs: return build_cn10pfs( policy );
  case cell_name::cn8p10g: return build_cn8p10g( policy );
  case cell_name::ccmos: return build_ccmos( mos );
  case cell_name::tgcmos: return build_tgcmos( mos );
  }
  throw invalid_argument( "unknown cell" );
}

/*! \brief Expected output bits of a cell for an input pattern (bit i of `pattern` is input i, MSB first). */
inline std::vector<bool> expected_outputs( cell_name name, std::vector<bool> const& inputs )
{
  if ( name == cell_name::xor_module )
    return { inputs.at( 0 ) != inputs.at( 1 ) };
  auto const r = full_adder_truth( inputs.at( 0 ), inputs.at( 1 ), inputs.at( 2 ) );
  return { r.sum, r.cout };
}

} // namespace cnfa
