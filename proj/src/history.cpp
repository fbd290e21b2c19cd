#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "tda/error.hpp"
#include "tda/history.hpp"

namespace tda {

std::string format_double(double v) {
  // shortest representation that parses back to the same double
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_config_echo(const std::map<std::string, std::string>& config_echo) {
  std::string out;
  for (const auto& [key, value] : config_echo) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  }
  return out;
}

void write_config_echo(const std::string& path,
                       const std::map<std::string, std::string>& config_echo) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << render_config_echo(config_echo);
  if (!os) throw IoError("write to '" + path + "' failed");
}

void write_history_csv(const std::string& path, const RunHistory& history,
                       const std::map<std::string, std::string>& config_echo) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& [key, value] : config_echo) os << "# " << key << " = " << value << "\n";
  os << "step,epoch,kind,loss_class,loss_disc,loss_teach,loss_adv_f,loss_adv_q,"
        "loss_entropic,loss_smooth,loss_advd_disc,loss_advd_enc,acc_source,acc_target\n";
  std::size_t next_epoch = 0;
  for (const auto& r : history.steps) {
    os << r.step << ',' << r.epoch << ",step," << format_double(r.loss_class) << ','
       << format_double(r.loss_disc) << ',' << format_double(r.loss_teach) << ','
       << format_double(r.loss_adv_f) << ',' << format_double(r.loss_adv_q) << ','
       << format_double(r.loss_entropic) << ',' << format_double(r.loss_smooth) << ','
       << format_double(r.loss_advd_disc) << ',' << format_double(r.loss_advd_enc)
       << ",,\n";
    // epoch rows interleave at their recorded step
    while (next_epoch < history.epochs.size() &&
           history.epochs[next_epoch].step == r.step) {
      const auto& e = history.epochs[next_epoch++];
      os << e.step << ',' << e.epoch << ",epoch,,,,,,,,,,"
         << format_double(e.acc_source) << ',' << format_double(e.acc_target) << "\n";
    }
  }
  while (next_epoch < history.epochs.size()) {
    const auto& e = history.epochs[next_epoch++];
    os << e.step << ',' << e.epoch << ",epoch,,,,,,,,,,"
       << format_double(e.acc_source) << ',' << format_double(e.acc_target) << "\n";
  }
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace tda
