#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "enose/bench.hpp"

namespace enose::bench {

/// Standardizer, projection and one-vs-one SVM, fitted together on raw
/// 12-dimensional feature rows. Stored as an `enose-svm 1` text file.
struct ClassifierBundle {
  Projector projector;
  svm::SvmModel svm;
};

/// Projection plus MLP on acetone ppm. Stored as an `enose-mlp 1` text file.
struct RegressorBundle {
  Projector projector;
  mlp::MlpModel mlp;
};

/// The SVM gamma of an RBF kernel defaults to default_gamma() of the projected
/// training rows.
ClassifierBundle train_classifier(const Matrix& x, std::span<const int> labels, const PipelineConfig& cfg);
std::vector<int> classify(const ClassifierBundle& b, const Matrix& x);

RegressorBundle train_regressor(const Matrix& x, std::span<const double> targets_ppm, const PipelineConfig& cfg);
std::vector<double> predict_concentration(const RegressorBundle& b, const Matrix& x);

void write_projector(std::ostream& out, const Projector& p);
Projector read_projector(std::istream& in);

void write_classifier(std::ostream& out, const ClassifierBundle& b);
ClassifierBundle read_classifier(std::istream& in);
void write_regressor(std::ostream& out, const RegressorBundle& b);
RegressorBundle read_regressor(std::istream& in);

void save_classifier(const std::filesystem::path& path, const ClassifierBundle& b);
ClassifierBundle load_classifier(const std::filesystem::path& path);
void save_regressor(const std::filesystem::path& path, const RegressorBundle& b);
RegressorBundle load_regressor(const std::filesystem::path& path);

/// Confusion matrix, per-class precision/recall and accuracy over the union
/// of true and predicted classes.
void score_classification(RunReport& r, std::span<const int> truth, std::span<const int> predicted);

}  // namespace enose::bench
