#include "tsreg/panel.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tsreg {

long PanelDataset::total_observations() const {
  long total = 0;
  for (int m : group_sizes) total += m;
  return total;
}

void PanelDataset::validate() const {
  if (n != static_cast<int>(group_sizes.size()))
    throw std::invalid_argument("panel: n does not match group_sizes length");
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("panel: ragged arrays do not match n");
  if (!f_true.empty() && static_cast<int>(f_true.size()) != n)
    throw std::invalid_argument("panel: f_true shape mismatch");
  for (int i = 0; i < n; ++i) {
    int m = group_sizes[i];
    if (m <= 0) throw std::invalid_argument("panel: nonpositive group size");
    if (x[i].rows() != m || x[i].cols() != d)
      throw std::invalid_argument("panel: x shape mismatch at row " + std::to_string(i));
    if (y[i].size() != m)
      throw std::invalid_argument("panel: y shape mismatch at row " + std::to_string(i));
    if (!f_true.empty() && f_true[i].size() != m)
      throw std::invalid_argument("panel: f_true shape mismatch at row " + std::to_string(i));
    if ((x[i].array() < 0.0).any() || (x[i].array() > 1.0).any())
      throw std::invalid_argument("panel: design coordinate outside [0,1] at row " +
                                  std::to_string(i));
  }
}

namespace {

void write_value(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void save_panel(const PanelDataset& panel, const std::string& path) {
  panel.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("panel: cannot open for writing: " + path);
  os << "tsreg-panel 1\n";
  os << panel.n << ' ' << panel.d << ' ' << (panel.has_f_true() ? 1 : 0) << '\n';
  for (int i = 0; i < panel.n; ++i)
    os << panel.group_sizes[i] << (i + 1 < panel.n ? ' ' : '\n');
  for (int i = 0; i < panel.n; ++i) {
    for (int j = 0; j < panel.group_sizes[i]; ++j) {
      os << (i + 1) << ' ' << (j + 1);
      for (int k = 0; k < panel.d; ++k) {
        os << ' ';
        write_value(os, panel.x[i](j, k));
      }
      os << ' ';
      write_value(os, panel.y[i](j));
      if (panel.has_f_true()) {
        os << ' ';
        write_value(os, panel.f_true[i](j));
      }
      os << '\n';
    }
  }
  if (!os) throw std::runtime_error("panel: write failed: " + path);
}

PanelDataset load_panel(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("panel: cannot open: " + path);
  std::string tag;
  int version = 0;
  is >> tag >> version;
  if (tag != "tsreg-panel" || version != 1)
    throw std::runtime_error("panel: unrecognized format tag in " + path);
  PanelDataset panel;
  int has_ftrue = 0;
  is >> panel.n >> panel.d >> has_ftrue;
  if (!is || panel.n <= 0 || panel.d <= 0)
    throw std::runtime_error("panel: bad header in " + path);
  panel.group_sizes.resize(panel.n);
  for (int i = 0; i < panel.n; ++i) is >> panel.group_sizes[i];
  panel.x.resize(panel.n);
  panel.y.resize(panel.n);
  if (has_ftrue) panel.f_true.resize(panel.n);
  for (int i = 0; i < panel.n; ++i) {
    int m = panel.group_sizes[i];
    panel.x[i].resize(m, panel.d);
    panel.y[i].resize(m);
    if (has_ftrue) panel.f_true[i].resize(m);
  }
  int i1 = 0, j1 = 0;
  while (is >> i1 >> j1) {
    if (i1 < 1 || i1 > panel.n || j1 < 1 || j1 > panel.group_sizes[i1 - 1])
      throw std::runtime_error("panel: observation index out of range in " + path);
    for (int k = 0; k < panel.d; ++k) is >> panel.x[i1 - 1](j1 - 1, k);
    is >> panel.y[i1 - 1](j1 - 1);
    if (has_ftrue) is >> panel.f_true[i1 - 1](j1 - 1);
    if (!is) throw std::runtime_error("panel: truncated observation line in " + path);
  }
  panel.validate();
  return panel;
}

}  // namespace tsreg
