#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace grtree {

enum class AttachKind { uniform, affine, sublinear, constant, custom_table };
enum class TableExtension { hold_last_value, reject };

const char* to_string(AttachKind k);
const char* to_string(TableExtension e);

// Degree-indexed attachment weights f(1), f(2), ... together with the growth
// metadata the series and simulation machinery relies on:
//
//   f_star        f(i) >= f_star for all i, and f_star > 0 for usable models
//   linear_bound  pair (C, b): f(i) <= C*i + b for all i >= 1
//   limsup_bound  L >= limsup_i f(i)/i
//   sup_bound     sup_i f(i) when f is bounded, unset otherwise
//
// Canonical kinds compute exact metadata in their constructors. Custom tables
// get conservative computed defaults; callers may declare tighter (or wrong)
// values, which validate() cross-checks by sampled evaluation.
class AttachmentFunction {
 public:
  static AttachmentFunction uniform(double scale = 1.0);
  // f(i) = scale * (i + beta); beta = 0 is proportional attachment f(i) = i.
  static AttachmentFunction affine(double beta, double scale = 1.0);
  // f(i) = scale * i^alpha, alpha in (0, 1).
  static AttachmentFunction sublinear(double alpha, double scale = 1.0);
  static AttachmentFunction constant(double c, double scale = 1.0);
  static AttachmentFunction custom_table(std::vector<double> values, TableExtension ext,
                                         double scale = 1.0);

  // i >= 1. Throws ConfigError for i == 0 and std::domain_error past the end
  // of a reject-extension table.
  double evaluate(std::uint64_t i) const;

  AttachKind kind() const { return kind_; }
  double scale() const { return scale_; }
  double beta() const { return beta_; }
  double alpha() const { return alpha_; }
  double constant_value() const { return const_; }
  const std::vector<double>& table() const { return table_; }
  TableExtension extension() const { return ext_; }
  // False only for reject-extension tables: evaluation past the table errors.
  bool total() const { return kind_ != AttachKind::custom_table || ext_ == TableExtension::hold_last_value; }

  double f_star() const { return f_star_; }
  std::pair<double, double> linear_bound() const { return {lin_c_, lin_b_}; }
  double limsup_bound() const { return limsup_; }
  std::optional<double> sup_bound() const { return sup_; }

  // Rigorous inf/sup of f over {i > k}; the series tail devices need these.
  // suffix_sup returns +infinity for unbounded kinds.
  double suffix_inf(std::uint64_t k) const;
  double suffix_sup(std::uint64_t k) const;

  // Replace computed metadata with caller declarations (validated separately).
  void declare_metadata(std::optional<double> f_star,
                        std::optional<std::pair<double, double>> linear_bound,
                        std::optional<double> limsup_bound, std::optional<double> sup_bound);

  std::string to_json() const;
  static AttachmentFunction from_json(const std::string& text);
  // Short tag for file names, e.g. "uniform", "affine1", "sublinear0.5".
  std::string slug() const;

  bool operator==(const AttachmentFunction& other) const;

 private:
  AttachmentFunction() = default;
  void compute_custom_metadata();

  AttachKind kind_ = AttachKind::uniform;
  double scale_ = 1.0;
  double beta_ = 0.0;
  double alpha_ = 0.5;
  double const_ = 1.0;
  std::vector<double> table_;
  TableExtension ext_ = TableExtension::hold_last_value;

  double f_star_ = 1.0;
  double lin_c_ = 1.0;
  double lin_b_ = 0.0;
  double limsup_ = 0.0;
  std::optional<double> sup_;
  std::vector<double> table_suffix_min_;
  std::vector<double> table_suffix_max_;
};

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::optional<std::uint64_t> witness;  // probe index of the first violation
  std::string note;
};

struct ValidationReport {
  bool passed = true;
  std::vector<ValidationCheck> checks;
  std::string to_json() const;
};

// Probe indices {1..64} plus round(1.5^j) for j <= 35, deduplicated.
std::vector<std::uint64_t> validation_probe_grid();

// Samples f on the probe grid and cross-checks the declared metadata:
// positivity, f_star floor, linear_bound, limsup consistency (excess-over-L*i
// ratio must decay along the grid tail), sup_bound, totality of the extension.
ValidationReport validate(const AttachmentFunction& f);

}  // namespace grtree
