// Walks one full adder through the toolkit: device numbers, netlist,
// switch-level checks and a transient measurement.

#include <cstdio>
#include <iostream>

#include <cnfa/cnfa.hpp>

int main()
{
  using namespace cnfa;

  chirality_vector const tube{ 55u, 0u };
  double const d = cnt_diameter( tube );
  std::printf( "chirality %s: diameter %.4f nm, |vth| %.4f V\n", tube.to_string().c_str(), d, threshold_voltage( d ) );

  auto const cell = build_cn8p10g( diameter_policy::uniform( tube ) );
  std::printf( "%s: %zu transistors, validation %s\n", cell.name().c_str(), cell.transistor_count(),
               validate_netlist( cell ).clean() ? "clean" : "has diagnostics" );

  auto const truth = verify_truth_table( cell );
  for ( auto const& p : truth.patterns )
    std::printf( "  %s  sum=%-12s cout=%s\n", pattern_string( p.pattern ).c_str(), p.nodes.at( "sum" ).to_string().c_str(),
                 p.nodes.at( "cout" ).to_string().c_str() );
  std::printf( "truth table: %s\n", truth.passed ? "pass" : "FAIL" );

  std::cout << format_swing_text( swing_report( cell ) );

  operating_point const op; // 0.65 V, 2.1 fF, 250 MHz, 25 C
  auto const m = measure( cell, op );
  auto const& worst = m.transitions[m.worst];
  std::printf( "delay %.2f ps (%s on %s -> %s), power %.3f uW, PDP %.3g J\n", m.delay * 1e12, worst.output.c_str(),
               pattern_string( pattern_bits( worst.from, 3 ) ).c_str(), pattern_string( pattern_bits( worst.to, 3 ) ).c_str(),
               m.power * 1e6, m.pdp );

  auto const ref = find_reference( "CN8P10G", op.vdd );
  auto const bridge = find_reference( "CMOS-Bridge", op.vdd );
  std::printf( "published PDP improvement over CMOS-Bridge: %.1f%%\n", 100.0 * improvement( ref->pdp, bridge->pdp ) );
  return truth.passed ? 0 : 1;
}
