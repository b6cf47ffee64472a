#pragma once

/*
 * CSV writers for the data the command-line tool emits.  Numbers are printed
 * with 17 significant digits so every double round-trips; absent optional
 * fields stay empty.
 */

#include <cstdio>
#include <ostream>
#include <string>

#include "gtl/phase.hpp"
#include "gtl/reduced.hpp"
#include "gtl/sampler.hpp"

namespace gtl {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_phase_csv(const std::vector<PhaseRow>& rows, std::ostream& os) {
  os << "theta,count,positive_count,z0,x0,y0,order_param,residual\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_g17(*v) : std::string(); };
  for (const auto& r : rows) {
    os << format_g17(r.theta) << ',' << r.fixed_point_count << ',' << r.positive_law_count << ','
       << opt(r.z0) << ',' << opt(r.x0) << ',' << opt(r.y0) << ',' << opt(r.order_param) << ','
       << format_g17(r.residual_max) << '\n';
  }
}

inline void write_configuration_csv(const Configuration& cfg, std::ostream& os) {
  os << "vertex_index,depth,parent_index,spin\n";
  for (std::size_t v = 0; v < cfg.spins.size(); ++v) {
    os << v << ',' << cfg.depths[v] << ',';
    if (cfg.parents[v] >= 0) os << cfg.parents[v];
    os << ',' << format_g17(cfg.spins[v]) << '\n';
  }
}

inline void write_fixed_points_csv(const ModelParams& p, const std::vector<FixedPoint2D>& points,
                                   std::ostream& os) {
  os << "kind,x,y,positive_law,residual\n";
  for (const auto& fp : points) {
    os << kind_name(fp.kind) << ',' << format_g17(fp.x) << ',' << format_g17(fp.y) << ','
       << (fp.positive_law ? "true" : "false") << ',' << format_g17(v_residual(p, fp.x, fp.y))
       << '\n';
  }
}

}  // namespace gtl
