#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cnfa
{

/*! \brief Base class of every error thrown by the library. */
class error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief A precondition on an argument does not hold. */
class invalid_argument : public error
{
public:
  using error::error;
};

/*! \brief Positioned diagnostic produced by the netlist and parameter parsers. */
class parse_error : public error
{
public:
  parse_error( std::size_t line, std::size_t column, std::string const& message, std::string expected = {} )
      : error( format( line, column, message, expected ) ),
        line_( line ),
        column_( column ),
        reason_( message ),
        expected_( std::move( expected ) )
  {
  }

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  std::string const& reason() const noexcept { return reason_; }
  std::string const& expected() const noexcept { return expected_; }

private:
  static std::string format( std::size_t line, std::size_t column, std::string const& message, std::string const& expected )
  {
    std::string s = std::to_string( line ) + ":" + std::to_string( column ) + ": " + message;
    if ( !expected.empty() )
      s += " (expected " + expected + ")";
    return s;
  }

  std::size_t line_;
  std::size_t column_;
  std::string reason_;
  std::string expected_;
};

/*! \brief Numerical failure inside the circuit simulator. */
class simulation_error : public error
{
public:
  using error::error;
};

/*! \brief Newton iteration did not converge. */
class convergence_error : public simulation_error
{
public:
  convergence_error( std::string const& message, std::string node = {}, double residual = 0.0 )
      : simulation_error( message ), node_( std::move( node ) ), residual_( residual )
  {
  }

  std::string const& worst_node() const noexcept { return node_; }
  double residual() const noexcept { return residual_; }

private:
  std::string node_;
  double residual_;
};

/*! \brief The nodal system has no unique solution (e.g. a net with no DC path). */
class singular_system_error : public simulation_error
{
public:
  using simulation_error::simulation_error;
};

} // namespace cnfa
