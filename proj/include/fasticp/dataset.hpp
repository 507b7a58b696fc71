#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fasticp/graphs.hpp"

namespace fasticp {

/// n samples of (environment label, covariate row, target value).
struct Dataset {
    std::vector<int> env;
    Eigen::MatrixXd x;  // n x d
    Eigen::VectorXd y;
    std::vector<std::string> column_names;  // covariate names, empty means X1..Xd
    std::uint64_t seed = 0;

    Eigen::Index size() const { return y.size(); }
    int covariate_count() const { return static_cast<int>(x.cols()); }
    /// Distinct environment labels, ascending.
    std::vector<int> environments() const;
    std::string column_name(int j) const;

    /// Throws ArgumentError if env/x/y lengths disagree.
    void validate() const;
};

/// Header `env,X1,...,Xd,Y`; numbers written with shortest round-trip text.
void write_csv(std::ostream& out, const Dataset& data);
Dataset read_csv(std::istream& in);

/// Ground-truth sidecar: edge list followed by `pa_y=` and `s_star=` lines.
struct GroundTruth {
    Dag dag;
    NodeSet pa_y;
    NodeSet s_star;
};

GroundTruth ground_truth_of(const Dag& dag);
void write_sidecar(std::ostream& out, const Dag& dag);
GroundTruth read_sidecar(std::istream& in);

std::string format_double(double v);

/// RFC-4180 field split of one line and the matching writer-side quoting.
std::vector<std::string> split_csv_line(const std::string& line);
std::string quote_csv_field(const std::string& field);
/// Locale-independent strict parse; throws ParseError with `context`.
double parse_double(const std::string& text, const std::string& context);

}  // namespace fasticp
