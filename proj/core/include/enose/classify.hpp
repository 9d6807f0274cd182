#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "enose/linalg.hpp"

namespace enose::svm {

enum class KernelType { linear, rbf };

struct Kernel {
  KernelType type = KernelType::rbf;
  double gamma = 1.0;

  double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct SvmParams {
  double c_penalty = 10.0;
  Kernel kernel{};
  /// KKT tolerance on y_i f(x_i).
  double tol = 1e-3;
  /// Guard on the number of SMO pair updates.
  int max_passes = 1000000;

  void validate() const;
};

/// Thrown when SMO does not reach the KKT tolerance within max_passes.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

/// f(x) = sum_i coef_i K(sv_i, x) + bias, with coef_i = alpha_i y_i.
struct BinaryModel {
  Kernel kernel;
  Matrix support_vectors;
  std::vector<double> coef;
  double bias = 0.0;

  double decision(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

/// Full dual solution, kept for diagnostics and tests.
struct BinaryTraining {
  BinaryModel model;
  std::vector<double> alphas;
  int iterations = 0;
};

/// SMO on the soft-margin dual with an error cache; each update optimises the
/// pair with the largest KKT-violating error gap |E_i - E_j|. Labels must be
/// -1/+1 with both present. On return every point satisfies the KKT
/// conditions within `tol` for the stored bias.
BinaryTraining svm_train_binary(const Matrix& x, std::span<const int> y, const SvmParams& params);

/// sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
double dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alphas,
                      const Kernel& kernel);

struct PairModel {
  int positive_class = 0;
  int negative_class = 0;
  BinaryModel model;
};

/// One-vs-one ensemble over sorted class codes.
struct SvmModel {
  std::vector<int> classes;
  std::vector<PairModel> pairs;
  std::size_t input_dim = 0;
};

SvmModel svm_train_multiclass(const Matrix& x, std::span<const int> labels, const SvmParams& params);

struct VoteResult {
  std::vector<int> votes;
  /// Per class: pairwise decisions oriented toward that class, summed.
  std::vector<double> decision_sums;
  int winner = 0;
  bool tied = false;
};

/// Majority vote; ties go to the tied class with the largest oriented sum.
VoteResult svm_vote(const SvmModel& model, std::span<const double> x);
int svm_predict(const SvmModel& model, std::span<const double> x);
std::vector<int> svm_predict(const SvmModel& model, const Matrix& x);

void write_svm(std::ostream& out, const SvmModel& m);
SvmModel read_svm(std::istream& in);

}  // namespace enose::svm
