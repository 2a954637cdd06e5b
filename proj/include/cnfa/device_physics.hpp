#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "error.hpp"
#include "units.hpp"

namespace cnfa
{

/*! \brief Chirality vector (n1, n2) of a single-wall carbon nanotube.
 *
 * Stored in canonical form n1 >= n2; the diameter does not depend on the order.
 */
class chirality_vector
{
public:
  constexpr chirality_vector() = default;

  chirality_vector( std::uint32_t n1, std::uint32_t n2 ) : n1_( std::max( n1, n2 ) ), n2_( std::min( n1, n2 ) )
  {
    if ( n1_ == 0u )
      throw invalid_argument( "chirality (0,0) does not describe a nanotube" );
  }

  std::uint32_t n1() const noexcept { return n1_; }
  std::uint32_t n2() const noexcept { return n2_; }

  friend bool operator==( chirality_vector const&, chirality_vector const& ) = default;

  std::string to_string() const { return "(" + std::to_string( n1_ ) + "," + std::to_string( n2_ ) + ")"; }

private:
  std::uint32_t n1_ = 19u;
  std::uint32_t n2_ = 0u;
};

/*! \brief Nanotube diameter in nm: 0.249 * sqrt(n1^2 + n2^2 + n1*n2) / pi. */
inline double cnt_diameter( chirality_vector const& c )
{
  double const n1 = c.n1();
  double const n2 = c.n2();
  return 0.249 * std::sqrt( n1 * n1 + n2 * n2 + n1 * n2 ) / constants::pi;
}

/*! \brief Threshold-voltage magnitude of a CNFET channel, 0.43 V*nm / diameter. */
inline double threshold_voltage( double diameter_nm )
{
  if ( !( diameter_nm > 0.0 ) || !std::isfinite( diameter_nm ) )
    throw invalid_argument( "threshold_voltage: diameter must be positive" );
  return 0.43 / diameter_nm;
}

/*! \brief A tube is metallic iff n1 - n2 is a multiple of 3. */
inline bool is_semiconducting( chirality_vector const& c )
{
  return ( c.n1() - c.n2() ) % 3u != 0u;
}

/*! \brief Gate width Min(Wmin, N * pitch).
 *
 * The Min form is kept as written; most CNFET literature uses Max here.
 */
inline double gate_width( int tube_count, double pitch, double wmin )
{
  if ( tube_count < 1 || !( pitch > 0.0 ) || !( wmin > 0.0 ) )
    throw invalid_argument( "gate_width: arguments must be positive" );
  return std::min( wmin, tube_count * pitch );
}

/*! \brief Thermal voltage kT/q at a temperature given in degrees Celsius. */
inline double thermal_voltage( double temperature_c )
{
  return constants::boltzmann * ( temperature_c + constants::zero_celsius ) / constants::electron_charge;
}

enum class polarity
{
  n,
  p
};

/*! \brief CNFET model parameters.
 *
 * The first eight fields are the physical device parameters of the 32 nm
 * MOSFET-like CNFET (SI units; `efi` in eV). The rest parameterise the
 * simplified square-law/exponential I-V model used by the simulator; their
 * defaults come from `tools/calibrate` and match `data/cnfet_default.params`.
 */
struct cnfet_model_params
{
  double lch = 32e-9;
  double lgeff = 100e-9;
  double lss = 32e-9;
  double ldd = 32e-9;
  double kgate = 16.0;
  double tox = 4e-9;
  double csub = 40e-12;
  double efi = 6.0;

  double pitch = 20e-9;
  double wmin = 32e-9;
  int tube_count = 1;
  double k_drive = 2.46e-4;  // A/V^2 per tube
  double lambda_clm = 0.05;  // 1/V
  double i_off = 1e-6;       // A per tube, at vgs = vth
  double n_sub = 1.2;
  double temp_exp = 1.5;

  friend bool operator==( cnfet_model_params const&, cnfet_model_params const& ) = default;

  void validate() const
  {
    auto positive = []( double v, char const* name ) {
      if ( !( v > 0.0 ) || !std::isfinite( v ) )
        throw invalid_argument( std::string( "cnfet parameter " ) + name + " must be positive" );
    };
    positive( lch, "Lch" );
    positive( lgeff, "Lgeff" );
    positive( lss, "Lss" );
    positive( ldd, "Ldd" );
    positive( tox, "Tox" );
    positive( csub, "Csub" );
    positive( efi, "Efi" );
    positive( pitch, "pitch" );
    positive( wmin, "Wmin" );
    positive( k_drive, "k_drive" );
    positive( i_off, "I_off" );
    positive( n_sub, "n_sub" );
    if ( !( kgate > 1.0 ) )
      throw invalid_argument( "cnfet parameter Kgate must exceed 1" );
    if ( tube_count < 1 )
      throw invalid_argument( "cnfet parameter tube_count must be at least 1" );
    if ( !( lambda_clm >= 0.0 ) || !std::isfinite( temp_exp ) )
      throw invalid_argument( "cnfet parameters lambda_clm/temp_exp out of range" );
  }
};

/*! \brief Square-law MOSFET parameters for the CMOS reference cells.
 *
 * Drive strength scales with W/L; the P device carries `p_mobility_ratio`
 * of the N transconductance, which a 2:1 P:N width ratio compensates.
 */
struct mos_model_params
{
  double vth = 0.2;
  double k_prime = 1.2e-4;     // A/V^2 per W/L square, N device
  double p_mobility_ratio = 0.5;
  double lambda_clm = 0.05;
  double i_off = 5e-7;         // A per W/L square, at vgs = vth
  double n_sub = 1.3;
  double temp_exp = 1.5;
  double cox = 0.0345;         // F/m^2
  double cj = 2e-10;           // F/m of width, each diffusion
  double default_w_n = 64e-9;
  double default_l = 32e-9;

  friend bool operator==( mos_model_params const&, mos_model_params const& ) = default;

  void validate() const
  {
    if ( !( vth > 0.0 ) || !( k_prime > 0.0 ) || !( p_mobility_ratio > 0.0 ) || !( i_off > 0.0 ) || !( n_sub > 0.0 ) ||
         !( cox > 0.0 ) || !( cj >= 0.0 ) || !( lambda_clm >= 0.0 ) || !( default_w_n > 0.0 ) || !( default_l > 0.0 ) )
      throw invalid_argument( "mos parameters out of range" );
  }
};

/*! \brief Resolved electrical rating of one CNFET. */
struct device_rating
{
  enum polarity polarity = polarity::n;
  chirality_vector chirality;
  double diameter_nm = 0.0;
  double vth = 0.0;          // signed: >= 0 for N, <= 0 for P
  double gate_width_nm = 0.0;
  int tubes = 1;
};

inline device_rating make_rating( enum polarity pol, chirality_vector const& c, cnfet_model_params const& params, int tubes = 0 )
{
  if ( !is_semiconducting( c ) )
    throw invalid_argument( "chirality " + c.to_string() + " is metallic and cannot form a transistor channel" );
  device_rating r;
  r.polarity = pol;
  r.chirality = c;
  r.tubes = tubes > 0 ? tubes : params.tube_count;
  r.diameter_nm = cnt_diameter( c );
  double const v = threshold_voltage( r.diameter_nm );
  r.vth = pol == polarity::n ? v : -v;
  r.gate_width_nm = gate_width( r.tubes, params.pitch, params.wmin ) * 1e9;
  return r;
}

/*! \brief Channel description shared by the CNFET and MOS code paths.
 *
 * All quantities are already scaled by tube count / W/L and temperature.
 */
struct channel
{
  enum polarity polarity = polarity::n;
  double vth = 0.2;      // magnitude
  double k = 1e-4;       // A/V^2
  double lambda = 0.0;
  double i_off = 1e-9;   // A at |vgs| = vth
  double n_sub = 1.0;
  double vt = 0.0258;    // thermal voltage
};

/*! \brief Drain current and its partial derivatives. */
struct current_eval
{
  double id = 0.0;  // into the drain
  double gm = 0.0;  // d id / d vgs
  double gds = 0.0; // d id / d vds
};

namespace detail
{

/* N-polarity current for vds >= 0. */
inline current_eval n_forward( channel const& ch, double vgs, double vds )
{
  double const vov = vgs - ch.vth;
  double const e_ds = std::exp( -vds / ch.vt );
  double const boundary = ch.i_off * ( 1.0 - e_ds );
  double const dboundary = ch.i_off * e_ds / ch.vt;
  current_eval r;
  if ( vov > 0.0 )
  {
    double const clm = 1.0 + ch.lambda * vds;
    double isq, d_vgs, d_vds;
    if ( vds < vov )
    {
      isq = ch.k * ( vov * vds - 0.5 * vds * vds );
      d_vgs = ch.k * vds;
      d_vds = ch.k * ( vov - vds );
    }
    else
    {
      isq = 0.5 * ch.k * vov * vov;
      d_vgs = ch.k * vov;
      d_vds = 0.0;
    }
    r.id = isq * clm + boundary;
    r.gm = d_vgs * clm;
    r.gds = d_vds * clm + isq * ch.lambda + dboundary;
  }
  else
  {
    double const e_gs = std::exp( vov / ( ch.n_sub * ch.vt ) );
    r.id = boundary * e_gs;
    r.gm = r.id / ( ch.n_sub * ch.vt );
    r.gds = dboundary * e_gs;
  }
  return r;
}

/* N-polarity current for any vds (source/drain swap for vds < 0). */
inline current_eval n_current( channel const& ch, double vgs, double vds )
{
  if ( vds >= 0.0 )
    return n_forward( ch, vgs, vds );
  auto const f = n_forward( ch, vgs - vds, -vds );
  return { -f.id, -f.gm, f.gm + f.gds };
}

} // namespace detail

/*! \brief Evaluates the piecewise channel model.
 *
 * Above threshold: square law with channel-length modulation in linear and
 * saturation regions. Below: I_off * exp(vov / (n V_T)) * (1 - exp(-vds / V_T)).
 * The boundary value I_off * (1 - exp(-vds / V_T)) is carried into the
 * above-threshold branch, so the current is continuous at vov = 0.
 * P devices obey I_p(vgs, vds) = -I_n(-vgs, -vds).
 */
inline current_eval evaluate_channel( channel const& ch, double vgs, double vds )
{
  if ( !std::isfinite( vgs ) || !std::isfinite( vds ) )
    throw invalid_argument( "drain current: non-finite bias" );
  if ( ch.polarity == polarity::n )
    return detail::n_current( ch, vgs, vds );
  auto const m = detail::n_current( ch, -vgs, -vds );
  return { -m.id, m.gm, m.gds };
}

inline double temperature_factor( double temperature_c, double temp_exp )
{
  return std::pow( ( temperature_c + constants::zero_celsius ) / 300.0, -temp_exp );
}

inline channel cnfet_channel( device_rating const& rating, cnfet_model_params const& params, double temperature_c )
{
  channel ch;
  ch.polarity = rating.polarity;
  ch.vth = std::abs( rating.vth );
  ch.k = params.k_drive * rating.tubes * temperature_factor( temperature_c, params.temp_exp );
  ch.lambda = params.lambda_clm;
  ch.i_off = params.i_off * rating.tubes;
  ch.n_sub = params.n_sub;
  ch.vt = thermal_voltage( temperature_c );
  return ch;
}

inline channel mos_channel( enum polarity pol, double w, double l, mos_model_params const& params, double temperature_c )
{
  channel ch;
  ch.polarity = pol;
  ch.vth = params.vth;
  double const ratio = w / l;
  double const mobility = pol == polarity::p ? params.p_mobility_ratio : 1.0;
  ch.k = params.k_prime * ratio * mobility * temperature_factor( temperature_c, params.temp_exp );
  ch.lambda = params.lambda_clm;
  ch.i_off = params.i_off * ratio * mobility;
  ch.n_sub = params.n_sub;
  ch.vt = thermal_voltage( temperature_c );
  return ch;
}

/*! \brief Drain current (A) of a CNFET, positive into the drain. */
inline double drain_current( device_rating const& rating, cnfet_model_params const& params, double vgs, double vds,
                             double temperature_c = 27.0 )
{
  return evaluate_channel( cnfet_channel( rating, params, temperature_c ), vgs, vds ).id;
}

/*! \brief Lumped linear capacitances of one transistor. */
struct device_capacitances
{
  double cgs = 0.0;
  double cgd = 0.0;
  double cdb = 0.0; // drain to ground
  double csb = 0.0; // source to ground
};

/* Coaxial gate-over-tube capacitance along the channel, split evenly between
   source and drain; the tube-to-substrate coupling of the doped extensions
   loads each diffusion node. */
inline device_capacitances cnfet_capacitances( device_rating const& rating, cnfet_model_params const& params )
{
  double const d = rating.diameter_nm * 1e-9;
  double const per_length =
      2.0 * constants::pi * constants::vacuum_permittivity * params.kgate / std::log( ( d + 2.0 * params.tox ) / d );
  double const cg = per_length * params.lch * rating.tubes;
  device_capacitances c;
  c.cgs = 0.5 * cg;
  c.cgd = 0.5 * cg;
  c.csb = params.csub * ( params.lss + 0.5 * params.lch ) * rating.tubes;
  c.cdb = params.csub * ( params.ldd + 0.5 * params.lch ) * rating.tubes;
  return c;
}

inline device_capacitances mos_capacitances( double w, double l, mos_model_params const& params )
{
  double const cg = params.cox * w * l;
  return { 0.5 * cg, 0.5 * cg, params.cj * w, params.cj * w };
}

} // namespace cnfa
