#include "fasticp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace fasticp {

std::vector<int> Dataset::environments() const {
    std::vector<int> labels = env;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

std::string Dataset::column_name(int j) const {
    if (j < 0 || j >= covariate_count()) {
        throw ArgumentError("column index out of range: " + std::to_string(j));
    }
    if (static_cast<int>(column_names.size()) == covariate_count()) return column_names[j];
    return "X" + std::to_string(j + 1);
}

void Dataset::validate() const {
    if (static_cast<Eigen::Index>(env.size()) != y.size() || x.rows() != y.size()) {
        throw ArgumentError("dataset: env, x rows and y must have the same length");
    }
    if (!column_names.empty() && static_cast<int>(column_names.size()) != covariate_count()) {
        throw ArgumentError("dataset: column_names must match the covariate count");
    }
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& context) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || text.empty()) {
        throw ParseError(context + ": cannot parse number '" + text + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string quote_csv_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

void write_csv(std::ostream& out, const Dataset& data) {
    data.validate();
    out << "env";
    for (int j = 0; j < data.covariate_count(); ++j) out << ',' << quote_csv_field(data.column_name(j));
    out << ",Y\n";
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        out << data.env[i];
        for (int j = 0; j < data.covariate_count(); ++j) out << ',' << format_double(data.x(i, j));
        out << ',' << format_double(data.y(i)) << '\n';
    }
}

Dataset read_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) break;
    }
    header = split_csv_line(line);
    if (header.size() < 2 || header.front() != "env" || header.back() != "Y") {
        throw ParseError("csv line " + std::to_string(line_no) + ": header must be env,X1,...,Xd,Y");
    }
    const int d = static_cast<int>(header.size()) - 2;

    std::vector<int> env;
    std::vector<double> values;  // row-major, d + 1 per row
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        const std::string where = "csv line " + std::to_string(line_no);
        if (fields.size() != header.size()) {
            throw ParseError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        int label = 0;
        const std::string& e = fields[0];
        auto res = std::from_chars(e.data(), e.data() + e.size(), label);
        if (res.ec != std::errc() || res.ptr != e.data() + e.size()) {
            throw ParseError(where + ": environment label must be an integer, got '" + e + "'");
        }
        env.push_back(label);
        for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(parse_double(fields[k], where));
    }

    Dataset data;
    const Eigen::Index n = static_cast<Eigen::Index>(env.size());
    data.env = std::move(env);
    data.x.resize(n, d);
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) data.x(i, j) = values[i * (d + 1) + j];
        data.y(i) = values[i * (d + 1) + d];
    }
    data.column_names.assign(header.begin() + 1, header.end() - 1);
    return data;
}

GroundTruth ground_truth_of(const Dag& dag) {
    GroundTruth truth{dag, relatives(dag, dag.target(), Relation::PA), {}};
    truth.s_star = set_intersection(relatives(dag, dag.environment(), Relation::DE), truth.pa_y);
    return truth;
}

namespace {

std::string join_ids(const NodeSet& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(ids[i]);
    }
    return out;
}

NodeSet parse_ids(const std::string& text, const std::string& where) {
    NodeSet ids;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        int v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
            throw ParseError(where + ": bad node id '" + tok + "'");
        }
        ids.push_back(v);
    }
    return make_set(std::move(ids));
}

}  // namespace

void write_sidecar(std::ostream& out, const Dag& dag) {
    GroundTruth truth = ground_truth_of(dag);
    write_edge_list(out, dag);
    out << "pa_y=" << join_ids(truth.pa_y) << '\n';
    out << "s_star=" << join_ids(truth.s_star) << '\n';
}

GroundTruth read_sidecar(std::istream& in) {
    std::stringstream edges;
    std::string line;
    GroundTruth truth;
    bool have_pa = false;
    bool have_s = false;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            header_seen = !line.empty();
            edges << line << '\n';
        } else if (line.rfind("pa_y=", 0) == 0) {
            truth.pa_y = parse_ids(line.substr(5), "sidecar pa_y");
            have_pa = true;
        } else if (line.rfind("s_star=", 0) == 0) {
            truth.s_star = parse_ids(line.substr(7), "sidecar s_star");
            have_s = true;
        } else {
            edges << line << '\n';
        }
    }
    truth.dag = read_edge_list(edges);
    GroundTruth derived = ground_truth_of(truth.dag);
    if ((have_pa && truth.pa_y != derived.pa_y) || (have_s && truth.s_star != derived.s_star)) {
        throw ParseError("sidecar: pa_y/s_star lines disagree with the edge list");
    }
    truth.pa_y = derived.pa_y;
    truth.s_star = derived.s_star;
    return truth;
}

}  // namespace fasticp
