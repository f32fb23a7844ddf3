#include "ebm2/io.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "ebm2/errors.hpp"

namespace ebm2 {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string coeffs_csv(const TrajectoryRecord& rec) {
  std::string s = "t,mode,field,coeff\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const std::string t = format_double(rec.times[i]);
    const auto& st = rec.states[i];
    for (const auto& [name, f] : {std::pair{"T_a", &st.t_a}, {"T_s", &st.t_s}})
      for (std::size_t n = 0; n < f->coeffs.size(); ++n)
        s += t + "," + std::to_string(n) + "," + name + "," + format_double(f->coeffs[n]) + "\n";
  }
  return s;
}

std::string nodal_csv(const TrajectoryRecord& rec, int n_points) {
  const auto xs = lobatto_points(n_points);
  std::string s = "t,x,T_a,T_s\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const std::string t = format_double(rec.times[i]);
    for (double x : xs)
      s += t + "," + format_double(x) + "," + format_double(rec.states[i].t_a(x)) + "," +
           format_double(rec.states[i].t_s(x)) + "\n";
  }
  return s;
}

std::string energy_csv(const TrajectoryRecord& rec) {
  std::string s = "t,E_H,E_V\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i)
    s += format_double(rec.times[i]) + "," + format_double(rec.energies[i].e_h) + "," +
         format_double(rec.energies[i].e_v) + "\n";
  return s;
}

std::string profile_csv(const StateVec& state, int n_points) {
  std::string s = "x,T_a,T_s\n";
  for (double x : lobatto_points(n_points))
    s += format_double(x) + "," + format_double(state.t_a(x)) + "," +
         format_double(state.t_s(x)) + "\n";
  return s;
}

std::string checks_csv(const std::vector<CheckRow>& rows) {
  std::string s = "check_name,passed,worst_value,tolerance\n";
  for (const auto& r : rows)
    s += r.name + "," + (r.passed ? "true" : "false") + "," + format_double(r.worst_value) + "," +
         format_double(r.tolerance) + "\n";
  return s;
}

std::string checks_text(const std::vector<CheckRow>& rows) {
  std::ostringstream os;
  int failed = 0;
  for (const auto& r : rows) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name << "  worst=" << format_double(r.worst_value)
       << " tol=" << format_double(r.tolerance);
    if (!r.detail.empty()) os << "  (" << r.detail << ")";
    os << "\n";
    failed += !r.passed;
  }
  os << rows.size() - failed << "/" << rows.size() << " checks passed\n";
  return os.str();
}

}  // namespace ebm2
