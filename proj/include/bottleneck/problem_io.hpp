#pragma once

// Problem files. JSON objects are dispatched on their keys:
//   p_y_given_x [, p_x, smoothing_epsilon]            -> JointDistribution
//   exp_family {features, params [, p_x]}             -> ExpFamilyModel
//   class_conditionals [, prior, smoothing_epsilon]   -> ClassificationProblem
// A .csv file holds a header of y labels and one row of p(y|x) per x, with an
// optional leading x-label column; p(x) is uniform.

#include "bottleneck/error_exp.hpp"
#include "bottleneck/expfam.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

namespace bottleneck {

using Problem = std::variant<JointDistribution, ExpFamilyModel, ClassificationProblem>;

// Schema problems raise ValidationError naming the JSON path of the field.
Problem load_problem(const std::filesystem::path& path);
Problem parse_problem_json(std::string_view text);
Problem parse_problem_csv(std::string_view text);

// The rule p(x, y) behind any problem kind.
JointDistribution problem_joint(const Problem& problem);

// JSON text for a classification problem, loadable by load_problem.
std::string classification_problem_json(const ClassificationProblem& problem, std::string_view note = {});

}  // namespace bottleneck
