#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cnfa/cnfa.hpp>

using namespace cnfa;

namespace
{

constexpr int exit_ok = 0;
constexpr int exit_diagnostics = 1;
constexpr int exit_usage = 2;

/* Usage problems detected after CLI11 has accepted the arguments. */
struct usage_error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

std::string read_file( std::string const& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw usage_error( "cannot open '" + path + "'" );
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file( std::filesystem::path const& path, std::string const& text )
{
  if ( path.has_parent_path() )
    std::filesystem::create_directories( path.parent_path() );
  std::ofstream out( path, std::ios::binary );
  out << text;
  if ( !out )
    throw usage_error( "cannot write '" + path.string() + "'" );
}

struct global_options
{
  std::string params;
  std::string policy = "55,0";

  model_set models() const { return params.empty() ? model_set{} : parse_model_params( read_file( params ) ); }
};

/* A built-in cell name or a path to a .cnl file. */
netlist load_cell( std::string const& what, global_options const& g )
{
  if ( auto const c = find_cell( what ) )
    return build_cell( *c, diameter_policy::uniform( parse_policy( g.policy ) ), g.models().mos );
  if ( std::filesystem::exists( what ) )
    return parse_netlist( read_file( what ) );
  throw usage_error( "'" + what + "' is neither a built-in cell nor a readable netlist file" );
}

int cmd_cells_list()
{
  std::printf( "%-12s %5s  %-8s %s\n", "cell", "count", "inputs", "outputs" );
  for ( auto const& c : all_cells() )
  {
    std::string in, out;
    for ( auto const& p : c.inputs )
      in += ( in.empty() ? "" : "," ) + p;
    for ( auto const& p : c.outputs )
      out += ( out.empty() ? "" : "," ) + p;
    std::printf( "%-12s %5d  %-8s %s\n", std::string( c.label ).c_str(), c.declared_count, in.c_str(), out.c_str() );
  }
  return exit_ok;
}

int cmd_cells_emit( std::string const& name, std::string const& output, global_options const& g )
{
  auto const c = find_cell( name );
  if ( !c )
    throw usage_error( "unknown cell '" + name + "'" );
  auto const text = emit_netlist( build_cell( *c, diameter_policy::uniform( parse_policy( g.policy ) ), g.models().mos ) );
  if ( output.empty() || output == "-" )
    std::cout << text;
  else
    write_file( output, text );
  return exit_ok;
}

int cmd_verify( std::string const& what, global_options const& g )
{
  auto const n = load_cell( what, g );
  int rc = exit_ok;
  auto const report = validate_netlist( n );
  for ( auto const& d : report.items )
  {
    std::cout << ( d.severity == severity::error ? "error" : "warning" ) << ": " << d.code
              << ( d.subject.empty() ? "" : " [" + d.subject + "]" ) << ": " << d.message << "\n";
    if ( d.severity == severity::error )
      rc = exit_diagnostics;
  }
  switch_options opts;
  opts.mos = g.models().mos;
  auto const s = verify_truth_table( n, opts );
  for ( auto const& p : s.patterns )
  {
    std::cout << pattern_string( p.pattern );
    for ( auto const& o : n.outputs() )
      std::cout << "  " << o << '=' << p.nodes.at( o ).to_string() << ( p.correct.at( o ) ? "" : " (WRONG)" );
    std::cout << "\n";
  }
  std::cout << n.name() << ": " << ( s.passed ? "PASS" : "FAIL" ) << " (" << s.patterns.size() - s.failures << "/"
            << s.patterns.size() << " patterns)\n";
  return s.passed ? rc : exit_diagnostics;
}

struct point_options
{
  double vdd = 0.65;
  double cload_ff = 2.1;
  double freq_mhz = 250.0;
  double temp = 25.0;

  operating_point op() const { return { vdd, cload_ff * 1e-15, freq_mhz * 1e6, temp }; }
};

int cmd_swing( std::string const& what, double epsilon, std::string const& format, bool settle, point_options const& p,
               global_options const& g )
{
  auto const n = load_cell( what, g );
  switch_options opts;
  opts.vdd = p.vdd;
  opts.epsilon = epsilon;
  opts.mos = g.models().mos;
  std::optional<residual_table> residuals;
  if ( settle )
    residuals = measure( n, p.op(), g.models() ).residuals;
  auto const c = swing_report( n, opts, residuals ? &*residuals : nullptr );
  if ( format == "csv" )
    std::cout << format_swing_csv( c );
  else
    std::cout << format_swing_text( c );
  bool const degraded = std::any_of( c.outputs.begin(), c.outputs.end(), []( auto const& o ) { return !o.full_swing; } );
  return degraded ? exit_diagnostics : exit_ok;
}

int cmd_sim( std::string const& what, point_options const& p, std::vector<std::string> const& record,
             std::string const& waveform_path, global_options const& g )
{
  auto const n = load_cell( what, g );
  auto const models = g.models();
  if ( !record.empty() )
  {
    measure_options mo;
    auto const tb = build_testbench( n, p.op(), mo );
    sim_config cfg;
    cfg.vdd = p.vdd;
    cfg.temperature = p.temp;
    cfg.t_stop = tb.t_stop;
    cfg.dt_max = std::min( mo.dt_max, tb.half_period / 20.0 );
    cfg.dt_init = std::min( mo.ramp / 20.0, cfg.dt_max );
    cfg.dt_min = cfg.dt_init * 1e-6;
    auto const w = transient( tb.circuit, tb.drive, cfg, models, record );
    std::ostringstream s;
    s << "time_s";
    for ( auto const& net : w.nets )
      s << ',' << net;
    s << "\n";
    char buf[32];
    for ( std::size_t k = 0; k < w.time.size(); ++k )
    {
      std::snprintf( buf, sizeof buf, "%.9g", w.time[k] );
      s << buf;
      for ( auto const& v : w.values )
      {
        std::snprintf( buf, sizeof buf, "%.6g", v[k] );
        s << ',' << buf;
      }
      s << "\n";
    }
    if ( waveform_path.empty() || waveform_path == "-" )
    {
      std::cout << s.str();
      return exit_ok;
    }
    write_file( waveform_path, s.str() );
  }

  characterization_record r;
  r.cell = n.name();
  auto const op = p.op();
  r.vdd = op.vdd;
  r.cload = op.cload;
  r.frequency = op.frequency;
  r.temperature = op.temperature;
  int rc = exit_ok;
  try
  {
    auto const m = measure( n, op, models );
    r.delay = m.delay;
    r.power = m.power;
    r.pdp = m.pdp;
  }
  catch ( simulation_error const& e )
  {
    r.status = "failed";
    r.reason = e.what();
    rc = exit_diagnostics;
  }
  std::cout << emit_csv( { r } );
  return rc;
}

int cmd_sweep( std::string const& plan_path, std::string const& out_dir, std::string const& format,
               std::string const& quantity, unsigned threads, global_options const& g )
{
  auto plan = parse_sweep_plan( read_file( plan_path ) );
  sweep_options opts;
  opts.threads = threads;
  opts.models = g.models();
  auto const records = run_sweep( plan, opts );

  auto const f = report_format_from( format );
  auto const q = quantity == "delay" ? report_quantity::delay : quantity == "power" ? report_quantity::power : report_quantity::pdp;
  std::string text;
  if ( f == report_format::plotdata && quantity == "all" )
    for ( auto qq : { report_quantity::delay, report_quantity::power, report_quantity::pdp } )
      text += emit_report( records, f, qq ) + "\n";
  else
    text = emit_report( records, f, q );

  std::string target = out_dir.empty() ? plan.output : out_dir;
  if ( target.empty() || target == "-" )
    std::cout << text;
  else
  {
    auto const stem = std::filesystem::path( plan_path ).stem().string();
    auto const ext = f == report_format::plotdata ? ".dat" : ".csv";
    auto const path = std::filesystem::path( target ) / ( stem + ( f == report_format::table2 ? "_table2" : "" ) + ext );
    write_file( path, text );
    std::cout << "wrote " << records.size() << " records to " << path.string() << "\n";
  }
  auto const failed = std::count_if( records.begin(), records.end(), []( auto const& r ) { return r.status == "failed"; } );
  if ( failed )
    std::cerr << failed << " of " << records.size() << " points failed\n";
  return failed ? exit_diagnostics : exit_ok;
}

int cmd_reference( std::string const& format )
{
  auto const rows = load_reference_table();
  auto const f = report_format_from( format );
  std::cout << emit_report( rows, f );
  auto const bad = inconsistent_reference_rows();
  for ( auto const& r : bad )
    std::cerr << "inconsistent: " << r.cell << " at " << format_quantity( r.vdd, "V" ) << ": delay x power = "
              << r.delay * r.power / 1e-17 << "E-17 J, printed " << r.pdp / 1e-17 << "E-17 J\n";
  return exit_ok;
}

int cmd_improve( std::string const& a, std::string const& ref, double vdd )
{
  auto const ra = find_reference( a, vdd );
  auto const rr = find_reference( ref, vdd );
  if ( !ra || !rr )
    throw usage_error( "no reference data for '" + ( ra ? ref : a ) + "' at " + format_quantity( vdd, "V" ) );
  double const x = improvement( ra->pdp, rr->pdp );
  std::printf( "%s vs %s at %s: PDP %.5g vs %.5g E-17 J, improvement %.2f%%\n", ra->cell.c_str(), rr->cell.c_str(),
               format_quantity( vdd, "V" ).c_str(), ra->pdp / 1e-17, rr->pdp / 1e-17, 100.0 * x );
  return exit_ok;
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "CNFET full-adder toolkit: cell library, switch-level checks, transient characterization" };
  app.require_subcommand( 1 );
  global_options g;
  app.add_option( "--params", g.params, "Device parameter file" );

  auto* cells = app.add_subcommand( "cells", "List built-in cells or emit a netlist" );
  cells->require_subcommand( 1 );
  auto* cells_list = cells->add_subcommand( "list", "Print name, transistor count and ports" );
  auto* cells_emit = cells->add_subcommand( "emit", "Write the .cnl netlist of a cell" );
  std::string emit_name, emit_out;
  cells_emit->add_option( "cell", emit_name, "Cell name" )->required();
  cells_emit->add_option( "-o,--out", emit_out, "Output file (default stdout)" );
  cells_emit->add_option( "--policy", g.policy, "Chirality n1,n2 for every CNFET" );

  std::string target;
  auto* verify = app.add_subcommand( "verify", "Validate a netlist and check its truth table" );
  verify->add_option( "cell", target, "Cell name or .cnl file" )->required();
  verify->add_option( "--policy", g.policy, "Chirality n1,n2 for every CNFET" );

  point_options point;
  double epsilon = 0.2;
  std::string swing_format = "text";
  bool settle = false;
  auto* swing = app.add_subcommand( "swing", "Classify outputs as FullSwing or Degraded (exit 1 if any is Degraded)" );
  swing->add_option( "cell", target, "Cell name or .cnl file" )->required();
  swing->add_option( "--vdd", point.vdd, "Supply in V" );
  swing->add_option( "--epsilon", epsilon, "Allowed drop as a fraction of vdd" );
  swing->add_option( "--policy", g.policy, "Chirality n1,n2 for every CNFET" );
  swing->add_option( "--format", swing_format, "text or csv" )->check( CLI::IsMember( { "text", "csv" } ) );
  swing->add_flag( "--settle", settle, "Also classify transient settling residuals" );
  swing->add_option( "--cload", point.cload_ff, "Load in fF (with --settle)" );
  swing->add_option( "--freq", point.freq_mhz, "Frequency in MHz (with --settle)" );
  swing->add_option( "--temp", point.temp, "Temperature in C (with --settle)" );

  std::vector<std::string> record;
  std::string waveform_path;
  auto* sim = app.add_subcommand( "sim", "Measure delay, power and PDP of one cell at one point" );
  sim->add_option( "cell", target, "Cell name or .cnl file" )->required();
  sim->add_option( "--vdd", point.vdd, "Supply in V" );
  sim->add_option( "--cload", point.cload_ff, "Load in fF" );
  sim->add_option( "--freq", point.freq_mhz, "Frequency in MHz" );
  sim->add_option( "--temp", point.temp, "Temperature in C" );
  sim->add_option( "--policy", g.policy, "Chirality n1,n2 for every CNFET" );
  sim->add_option( "--record", record, "Nets to dump as a waveform CSV" )->delimiter( ',' );
  sim->add_option( "--waveform", waveform_path, "Waveform CSV path (default stdout)" );

  std::string plan_path, out_dir, sweep_format = "csv", quantity = "pdp";
  unsigned threads = 0;
  auto* sweep = app.add_subcommand( "sweep", "Run a sweep plan" );
  sweep->add_option( "plan", plan_path, "Sweep plan file" )->required();
  sweep->add_option( "--out", out_dir, "Output directory (overrides the plan's out key)" );
  sweep->add_option( "--format", sweep_format, "csv, table2 or plotdata" )
      ->check( CLI::IsMember( { "csv", "table2", "plotdata" } ) );
  sweep->add_option( "--quantity", quantity, "Plotted quantity: delay, power, pdp or all" )
      ->check( CLI::IsMember( { "delay", "power", "pdp", "all" } ) );
  sweep->add_option( "--threads", threads, "Worker threads (0: all cores)" );

  std::string reference_format = "table2";
  auto* reference = app.add_subcommand( "reference", "Print the published comparison table" );
  reference->add_option( "--format", reference_format, "csv or table2" )->check( CLI::IsMember( { "csv", "table2" } ) );

  std::string cell_a, cell_ref;
  double improve_vdd = 0.65;
  auto* improve = app.add_subcommand( "improve", "PDP improvement of one design over another" );
  improve->add_option( "cell", cell_a, "Design" )->required();
  improve->add_option( "reference", cell_ref, "Reference design" )->required();
  improve->add_option( "--vdd", improve_vdd, "Supply in V" )->required();

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::CallForHelp const& e )
  {
    return app.exit( e );
  }
  catch ( CLI::CallForAllHelp const& e )
  {
    return app.exit( e );
  }
  catch ( CLI::ParseError const& e )
  {
    app.exit( e );
    return exit_usage;
  }

  try
  {
    if ( cells_list->parsed() )
      return cmd_cells_list();
    if ( cells_emit->parsed() )
      return cmd_cells_emit( emit_name, emit_out, g );
    if ( verify->parsed() )
      return cmd_verify( target, g );
    if ( swing->parsed() )
      return cmd_swing( target, epsilon, swing_format, settle, point, g );
    if ( sim->parsed() )
      return cmd_sim( target, point, record, waveform_path, g );
    if ( sweep->parsed() )
      return cmd_sweep( plan_path, out_dir, sweep_format, quantity, threads, g );
    if ( reference->parsed() )
      return cmd_reference( reference_format );
    if ( improve->parsed() )
      return cmd_improve( cell_a, cell_ref, improve_vdd );
  }
  catch ( usage_error const& e )
  {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  }
  catch ( invalid_argument const& e )
  {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  }
  catch ( std::exception const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_diagnostics;
  }
  return exit_usage;
}
