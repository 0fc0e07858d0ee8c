#ifndef GNNLAB_GRAPH_OPS_HPP
#define GNNLAB_GRAPH_OPS_HPP

#include "gnnlab/types.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace gnnlab {

enum class DiffusionKind { SelfLoop, DegreeNormalized, Identity };

std::string_view to_string(DiffusionKind kind);
DiffusionKind parse_diffusion_kind(std::string_view text);

/// The graph matrix multiplied into every layer.
///   SelfLoop:          A + I
///   DegreeNormalized:  (D+I)^{-1/2} (A+I) (D+I)^{-1/2},  D = diag(row sums of A)
///   Identity:          I
struct DiffusionOperator {
    DiffusionKind kind = DiffusionKind::Identity;
    Matrix matrix;
};

/// Rejects non-square, asymmetric, non-binary, or nonzero-diagonal input.
void check_adjacency(const Matrix& a);

DiffusionOperator build_diffusion(const Matrix& adjacency, DiffusionKind kind);

/// Maximum absolute row sum.
double inf_norm(const Matrix& m);

/// Maximum Euclidean norm over COLUMNS.
///
/// This is the convention the generalization bounds use for ||.||_{2->inf};
/// it is not the usual max-row-norm meaning of that symbol.
double max_col_two_norm(const Matrix& m);

double frobenius_norm(const Matrix& m);

/// Thrown when power iteration fails to settle; carries the last estimate.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_estimate, int iterations)
        : std::runtime_error(what), last_estimate_(last_estimate), iterations_(iterations) {}
    [[nodiscard]] double last_estimate() const { return last_estimate_; }
    [[nodiscard]] int iterations() const { return iterations_; }

private:
    double last_estimate_;
    int iterations_;
};

/// Largest singular value by power iteration on M^T M. Stops when the
/// eigen-residual ||M^T M v - lambda v|| drops below tol * lambda.
double spectral_norm(const Matrix& m, double tol = 1e-12, int max_iter = 200000);

/// Number of singular values above rel_tol times the largest.
int numerical_rank(const Matrix& m, double rel_tol = 1e-10);

struct DegreeStats {
    double min = 0;
    double max = 0;
    double mean = 0;
};

DegreeStats degree_stats(const Matrix& adjacency);

} // namespace gnnlab

#endif // GNNLAB_GRAPH_OPS_HPP
