#ifndef TSREG_PANEL_HPP
#define TSREG_PANEL_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace tsreg {

// Observed panel {(x_ij, y_ij)} with per-time group sizes m_i. Rows are time
// indices i = 0..n-1; within a row, j = 0..m_i-1. Design points live in
// [0,1]^d. f_true holds the noiseless regression function values when known
// (synthetic data) and is empty otherwise.
struct PanelDataset {
  int n = 0;
  int d = 0;
  std::vector<int> group_sizes;
  std::vector<Eigen::MatrixXd> x;  // x[i] is m_i x d
  std::vector<Eigen::VectorXd> y;  // y[i] has length m_i
  std::vector<Eigen::VectorXd> f_true;  // empty or same shape as y

  bool has_f_true() const { return !f_true.empty(); }
  long total_observations() const;

  // Throws std::invalid_argument if ragged shapes disagree or any design
  // coordinate falls outside [0,1].
  void validate() const;
};

// Columnar text serialization. Header carries n, d, group sizes; one
// observation per line: i j x_1 .. x_d y [f_true], 1-based indices,
// full 64-bit precision. Format tag "tsreg-panel 1".
void save_panel(const PanelDataset& panel, const std::string& path);
PanelDataset load_panel(const std::string& path);

}  // namespace tsreg

#endif  // TSREG_PANEL_HPP
