#ifndef GNNLAB_DATA_IO_HPP
#define GNNLAB_DATA_IO_HPP

#include "gnnlab/planted.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnnlab {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CoraOptions {
    std::uint64_t seed = 0;
    double train_fraction = 0.1;
    std::optional<std::size_t> feature_width = 1433; ///< unset: take the width of the first row
};

struct CoraStats {
    std::size_t dropped_citations = 0; ///< edges naming an id missing from the content file
    std::size_t self_citations = 0;
    std::size_t duplicate_edges = 0;
    std::vector<std::string> class_names; ///< by class index
};

/// Reads the public content/cites pair. Node order follows the content file,
/// features are row-normalized, classes are numbered by first appearance, and
/// the labeled set is the first ceil(train_fraction * n) nodes of a seeded shuffle.
Dataset load_cora(const std::string& content_path, const std::string& cites_path, const CoraOptions& options = {},
                  CoraStats* stats = nullptr);

inline constexpr int kDatasetFormatVersion = 1;

void save_dataset(const Dataset& dataset, const std::string& path);
void write_dataset(const Dataset& dataset, std::ostream& out);
Dataset load_dataset(const std::string& path);
Dataset read_dataset(std::istream& in);

/// One CSV line of a results file. Unset numeric fields are written empty.
struct ResultsRow {
    std::string experiment;
    std::string sweep_param;
    double sweep_value = 0;
    std::uint64_t seed = 0;
    int epoch = 0;
    double train_loss = 0;
    double unlabeled_loss = 0;
    double gap_loss = 0;
    double train_err01 = 0;
    double unlabeled_err01 = 0;
    double gap_err01 = 0;
    std::optional<double> bound_trc;
    std::optional<double> bound_vc;
    std::optional<double> bound_expected_sbm;
    std::optional<double> omega_used;
    std::optional<double> beta_used;
    std::optional<double> scale_factor;

    bool operator==(const ResultsRow&) const = default;
};

const std::vector<std::string>& results_header();

/// `comments` are written first, each prefixed with "# ".
void write_results(const std::vector<ResultsRow>& rows, std::ostream& out,
                   const std::vector<std::string>& comments = {});
void write_results(const std::vector<ResultsRow>& rows, const std::string& path,
                   const std::vector<std::string>& comments = {});
std::vector<ResultsRow> read_results(std::istream& in);
std::vector<ResultsRow> read_results(const std::string& path);

} // namespace gnnlab

#endif // GNNLAB_DATA_IO_HPP
