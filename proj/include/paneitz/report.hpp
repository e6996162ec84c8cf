#pragma once

#include <string>
#include <vector>

#include "paneitz/functionals.hpp"
#include "paneitz/suites.hpp"

namespace plab {

enum class OutputFormat { Json, Csv, Table };
OutputFormat output_format_from_string(const std::string& s);

/// JSON fields: family, functional, form, radii, flux, value, exponent, amplitude,
/// residual, converged, exact, gates{tau, tau_n, tau_ok, q_l1_ok, q_slope, note},
/// tolerances, notes.  CSV: one row per ladder radius.
std::string format_energy(const EnergyReport& rep, OutputFormat fmt);
std::string format_suite(const SuiteResult& res, OutputFormat fmt);
std::string format_invariants(const std::string& family, const std::vector<PointInvariants>& pts, OutputFormat fmt);

/// printf("%.17g"); "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

}  // namespace plab
