#include "gnnlab/data_io.hpp"

#include "gnnlab/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

namespace gnnlab {

namespace {

class LineReader {
public:
    LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    std::string expect(std::string_view what) {
        std::string line;
        if (!next(line)) fail("truncated file, expected " + std::string(what));
        return line;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw FormatError(source_ + ":" + std::to_string(line_no_) + ": " + message);
    }

    [[nodiscard]] std::size_t line_no() const { return line_no_; }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_no_ = 0;
};

} // namespace

Dataset load_cora(const std::string& content_path, const std::string& cites_path, const CoraOptions& options,
                  CoraStats* stats) {
    std::ifstream content(content_path);
    if (!content) throw FormatError("cannot open '" + content_path + "'");
    CoraStats local;
    CoraStats& st = stats ? *stats : local;
    st = CoraStats{};

    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    std::vector<int> classes;
    std::unordered_map<std::string, int> class_index;
    std::unordered_map<std::string, std::size_t> node_index;
    std::optional<std::size_t> width = options.feature_width;

    LineReader reader(content, content_path);
    std::string line;
    while (reader.next(line)) {
        const auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        if (fields.size() < 3) reader.fail("expected an id, features and a label");
        const std::size_t got = fields.size() - 2;
        if (!width) width = got;
        if (got != *width)
            reader.fail("expected " + std::to_string(*width) + " features, found " + std::to_string(got));
        std::vector<double> row(got);
        for (std::size_t j = 0; j < got; ++j) {
            const auto v = try_parse_double(fields[j + 1]);
            if (!v) reader.fail("unparseable feature value '" + std::string(fields[j + 1]) + "'");
            row[j] = *v;
        }
        std::string id(fields.front());
        if (node_index.count(id)) reader.fail("duplicate paper id '" + id + "'");
        node_index.emplace(id, ids.size());
        ids.push_back(std::move(id));
        const std::string label(fields.back());
        auto [it, inserted] = class_index.emplace(label, static_cast<int>(st.class_names.size()));
        if (inserted) st.class_names.push_back(label);
        classes.push_back(it->second);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError(content_path + ": no content rows");

    const std::size_t n = rows.size();
    const std::size_t d = *width;
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0;
        for (double v : rows[i]) sum += v;
        for (std::size_t j = 0; j < d; ++j)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                sum != 0.0 ? rows[i][j] / sum : 0.0;
    }

    std::ifstream cites(cites_path);
    if (!cites) throw FormatError("cannot open '" + cites_path + "'");
    ds.adjacency = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    LineReader cite_reader(cites, cites_path);
    while (cite_reader.next(line)) {
        const auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        if (fields.size() != 2) cite_reader.fail("expected two paper ids");
        const auto a = node_index.find(std::string(fields[0]));
        const auto b = node_index.find(std::string(fields[1]));
        if (a == node_index.end() || b == node_index.end()) {
            ++st.dropped_citations;
            continue;
        }
        if (a->second == b->second) {
            ++st.self_citations;
            continue;
        }
        const auto i = static_cast<Eigen::Index>(a->second), j = static_cast<Eigen::Index>(b->second);
        if (ds.adjacency(i, j) != 0.0) ++st.duplicate_edges;
        ds.adjacency(i, j) = ds.adjacency(j, i) = 1.0;
    }
    if (st.dropped_citations)
        std::cerr << "warning: dropped " << st.dropped_citations << " citations naming unknown papers\n";

    ds.classes = std::move(classes);
    ds.num_classes = static_cast<int>(st.class_names.size());
    const auto m = static_cast<std::size_t>(std::ceil(options.train_fraction * static_cast<double>(n)));
    ds.train_idx = choose_train_indices(n, std::clamp<std::size_t>(m, 1, n), options.seed);
    return ds;
}

void write_dataset(const Dataset& ds, std::ostream& out) {
    const std::size_t n = ds.num_nodes(), d = ds.feature_dim();
    std::size_t edges = 0;
    for (Eigen::Index i = 0; i < ds.adjacency.rows(); ++i)
        for (Eigen::Index j = i + 1; j < ds.adjacency.cols(); ++j)
            if (ds.adjacency(i, j) != 0.0) ++edges;

    out << "gnnlab-dataset " << kDatasetFormatVersion << "\n";
    out << "n " << n << " d " << d << " m " << ds.train_idx.size() << " num_classes " << ds.num_classes << " edges "
        << edges << " latent " << (ds.latent ? 1 : 0) << "\n";
    out << "edges\n";
    for (Eigen::Index i = 0; i < ds.adjacency.rows(); ++i)
        for (Eigen::Index j = i + 1; j < ds.adjacency.cols(); ++j)
            if (ds.adjacency(i, j) != 0.0) out << i << ' ' << j << '\n';
    out << "features\n";
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
            if (j) out << ',';
            out << format_double(ds.features(i, j));
        }
        out << '\n';
    }
    out << "classes\n";
    for (int c : ds.classes) out << c << '\n';
    out << "train\n";
    for (std::size_t i : ds.train_idx) out << i << '\n';
    if (ds.latent) {
        out << "latent " << ds.latent->gamma_actual << "\n";
        for (std::size_t i = 0; i < ds.latent->size(); ++i) out << ds.latent->z[i] << ' ' << ds.latent->y[i] << '\n';
    }
    out << "end\n";
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    write_dataset(dataset, out);
    if (!out) throw FormatError("write failed for '" + path + "'");
}

namespace {

std::size_t header_field(LineReader& r, const std::vector<std::string_view>& f, std::size_t pos,
                         std::string_view name) {
    if (pos + 1 >= f.size() || f[pos] != name) r.fail("header field '" + std::string(name) + "' missing");
    const auto v = try_parse_u64(f[pos + 1]);
    if (!v) r.fail("header field '" + std::string(name) + "' is not an integer");
    return *v;
}

long long parse_int(LineReader& r, std::string_view text) {
    const auto v = try_parse_i64(text);
    if (!v) r.fail("expected an integer, got '" + std::string(text) + "'");
    return *v;
}

void expect_marker(LineReader& r, std::string_view marker) {
    const std::string line = r.expect(marker);
    if (trim(line) != marker) r.fail("expected section '" + std::string(marker) + "'");
}

} // namespace

Dataset read_dataset(std::istream& in) {
    LineReader r(in, "dataset");
    {
        const std::string magic = r.expect("the format header");
        const auto f = split_whitespace(magic);
        if (f.size() != 2 || f[0] != "gnnlab-dataset") r.fail("not a gnnlab dataset file (bad version header)");
        const auto version = try_parse_i64(f[1]);
        if (!version || *version != kDatasetFormatVersion)
            r.fail("unsupported dataset format version '" + std::string(f[1]) + "' (expected " +
                   std::to_string(kDatasetFormatVersion) + ")");
    }
    const std::string header = r.expect("the size header");
    const auto f = split_whitespace(header);
    const std::size_t n = header_field(r, f, 0, "n");
    const std::size_t d = header_field(r, f, 2, "d");
    const std::size_t m = header_field(r, f, 4, "m");
    const std::size_t num_classes = header_field(r, f, 6, "num_classes");
    const std::size_t edges = header_field(r, f, 8, "edges");
    const std::size_t latent = header_field(r, f, 10, "latent");
    if (f.size() != 12) r.fail("unexpected trailing header fields");

    Dataset ds;
    ds.num_classes = static_cast<int>(num_classes);
    const auto nn = static_cast<Eigen::Index>(n);
    ds.adjacency = Matrix::Zero(nn, nn);
    expect_marker(r, "edges");
    for (std::size_t e = 0; e < edges; ++e) {
        const auto parts = split_whitespace(r.expect("an edge line"));
        if (parts.size() != 2) r.fail("edge lines hold two indices");
        const long long i = parse_int(r, parts[0]), j = parse_int(r, parts[1]);
        if (i < 0 || j <= i || j >= static_cast<long long>(n)) r.fail("edge indices must satisfy 0 <= i < j < n");
        ds.adjacency(i, j) = ds.adjacency(j, i) = 1.0;
    }
    expect_marker(r, "features");
    ds.features.resize(nn, static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        const std::string line = r.expect("a feature row");
        const auto parts = split(line, ',');
        if (parts.size() != d) r.fail("feature row has " + std::to_string(parts.size()) + " values, expected " +
                                      std::to_string(d));
        for (std::size_t j = 0; j < d; ++j) {
            const auto v = try_parse_double(parts[j]);
            if (!v) r.fail("unparseable feature value '" + std::string(parts[j]) + "'");
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v;
        }
    }
    expect_marker(r, "classes");
    ds.classes.resize(n);
    for (std::size_t i = 0; i < n; ++i) ds.classes[i] = static_cast<int>(parse_int(r, r.expect("a class line")));
    expect_marker(r, "train");
    ds.train_idx.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const long long v = parse_int(r, r.expect("a train index"));
        if (v < 0) r.fail("negative train index");
        ds.train_idx[i] = static_cast<std::size_t>(v);
    }
    if (latent) {
        const auto parts = split_whitespace(r.expect("the latent section"));
        if (parts.size() != 2 || parts[0] != "latent") r.fail("expected section 'latent'");
        LatentLabels labels;
        labels.gamma_actual = static_cast<std::size_t>(parse_int(r, parts[1]));
        labels.z.resize(n);
        labels.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto zy = split_whitespace(r.expect("a latent label line"));
            if (zy.size() != 2) r.fail("latent lines hold z and y");
            labels.z[i] = static_cast<int>(parse_int(r, zy[0]));
            labels.y[i] = static_cast<int>(parse_int(r, zy[1]));
        }
        ds.latent = std::move(labels);
    }
    expect_marker(r, "end");
    try {
        ds.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("dataset: ") + e.what());
    }
    return ds;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return read_dataset(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

const std::vector<std::string>& results_header() {
    static const std::vector<std::string> header = {
        "experiment",  "sweep_param",   "sweep_value", "seed",      "epoch",           "train_loss",
        "unlabeled_loss", "gap_loss",   "train_err01", "unlabeled_err01", "gap_err01", "bound_trc",
        "bound_vc",    "bound_expected_sbm", "omega_used", "beta_used", "scale_factor"};
    return header;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
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
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

} // namespace

void write_results(const std::vector<ResultsRow>& rows, std::ostream& out, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    const auto& header = results_header();
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
        out << csv_field(r.experiment) << ',' << csv_field(r.sweep_param) << ',' << format_double(r.sweep_value)
            << ',' << r.seed << ',' << r.epoch << ',' << format_double(r.train_loss) << ','
            << format_double(r.unlabeled_loss) << ',' << format_double(r.gap_loss) << ','
            << format_double(r.train_err01) << ',' << format_double(r.unlabeled_err01) << ','
            << format_double(r.gap_err01) << ',' << opt(r.bound_trc) << ',' << opt(r.bound_vc) << ','
            << opt(r.bound_expected_sbm) << ',' << opt(r.omega_used) << ',' << opt(r.beta_used) << ','
            << opt(r.scale_factor) << '\n';
    }
}

void write_results(const std::vector<ResultsRow>& rows, const std::string& path,
                   const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    write_results(rows, out, comments);
    if (!out) throw FormatError("write failed for '" + path + "'");
}

std::vector<ResultsRow> read_results(std::istream& in) {
    LineReader r(in, "results");
    std::string line;
    bool have_header = false;
    std::vector<ResultsRow> rows;
    const auto& header = results_header();
    while (r.next(line)) {
        if (line.empty() || line.front() == '#') continue;
        const auto fields = parse_csv_line(line);
        if (!have_header) {
            if (fields != header) r.fail("unexpected results header");
            have_header = true;
            continue;
        }
        if (fields.size() != header.size()) r.fail("expected " + std::to_string(header.size()) + " columns");
        auto num = [&](std::size_t k) {
            const auto v = try_parse_double(fields[k]);
            if (!v) r.fail("column '" + header[k] + "' is not a number");
            return *v;
        };
        auto optnum = [&](std::size_t k) -> std::optional<double> {
            if (fields[k].empty()) return std::nullopt;
            return num(k);
        };
        ResultsRow row;
        row.experiment = fields[0];
        row.sweep_param = fields[1];
        row.sweep_value = num(2);
        const auto seed = try_parse_u64(fields[3]);
        if (!seed) r.fail("column 'seed' is not an integer");
        row.seed = *seed;
        const auto epoch = try_parse_i64(fields[4]);
        if (!epoch) r.fail("column 'epoch' is not an integer");
        row.epoch = static_cast<int>(*epoch);
        row.train_loss = num(5);
        row.unlabeled_loss = num(6);
        row.gap_loss = num(7);
        row.train_err01 = num(8);
        row.unlabeled_err01 = num(9);
        row.gap_err01 = num(10);
        row.bound_trc = optnum(11);
        row.bound_vc = optnum(12);
        row.bound_expected_sbm = optnum(13);
        row.omega_used = optnum(14);
        row.beta_used = optnum(15);
        row.scale_factor = optnum(16);
        rows.push_back(std::move(row));
    }
    if (!have_header) r.fail("missing results header");
    return rows;
}

std::vector<ResultsRow> read_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    return read_results(in);
}

} // namespace gnnlab
