#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qduhamel/qcore.hpp"

namespace qduhamel {

/// Dense square matrix representation of a spatial operator.
/// interior_rows marks rows whose full stencil fit inside the grid; an empty
/// mask means every row is interior (e.g. block assemblies).
struct LinearOperator {
    Eigen::MatrixXd mat;
    std::string label;
    std::vector<bool> interior_rows;

    Eigen::Index dim() const { return mat.rows(); }
    bool row_interior(Eigen::Index i) const {
        return interior_rows.empty() || interior_rows[static_cast<std::size_t>(i)];
    }

    static LinearOperator scalar(double lambda, std::string label = "scalar");
    static LinearOperator zero(Eigen::Index n, std::string label = "0");
    static LinearOperator identity(Eigen::Index n, std::string label = "I");
    static LinearOperator dense(Eigen::MatrixXd m, std::string label = "matrix");
};

/// Ordered set of distinct nonzero spatial points with q-closure lookups.
class SpatialGrid {
public:
    SpatialGrid(std::vector<double> points, QParam q);

    int size() const { return static_cast<int>(points_.size()); }
    double point(int i) const { return points_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& points() const { return points_; }
    QParam q() const { return q_; }
    bool symmetric() const { return symmetric_; }

    std::optional<int> index_of(double x) const;
    /// Index of q * point(i), nullopt if that point lies outside the grid.
    std::optional<int> q_image(int i) const;

private:
    QParam q_;
    std::vector<double> points_;
    bool symmetric_ = false;
};

/// Jackson operator D_q as a matrix on the grid, zero extension outside.
LinearOperator assemble_jackson_dx(const SpatialGrid& grid);

/// Rubin operator as a matrix on a negation-symmetric grid, zero extension.
LinearOperator assemble_rubin_dx(const SpatialGrid& grid);

/// Which convention the stored matrix follows.
///   lhs_plus_L:    d_t U + L U = F   (matrix is the coupled-system L)
///   evolution_rhs: D_t U = A U + F   (matrix is the normalized A)
enum class SystemForm { lhs_plus_L, evolution_rhs };

struct BlockLayout {
    struct Component {
        std::string name;
        Eigen::Index offset;
        Eigen::Index size;
    };
    std::vector<Component> components;
    /// Component index receiving each forcing input, in input order.
    std::vector<int> forcing_slots;

    Eigen::Index dim() const;
    const Component& find(std::string_view name) const;
};

/// Block-structured operator plus the layout metadata needed to stack
/// initial data, scatter forcing inputs, and extract solution components.
struct BlockOperator {
    LinearOperator op;
    BlockLayout layout;
    SystemForm form = SystemForm::evolution_rhs;

    Eigen::Index dim() const { return op.dim(); }

    /// Matrix A of the normalized evolution form D_t U = A U + F.
    Eigen::MatrixXd normalized_a() const;

    Eigen::VectorXd extract(const Eigen::VectorXd& state, std::string_view name) const;
    /// Scatter forcing inputs into their slots; remaining components are zero.
    Eigen::VectorXd assemble_forcing(const std::vector<Eigen::VectorXd>& inputs) const;
    /// Stack per-component data vectors in component order.
    Eigen::VectorXd stack_initial(const std::vector<Eigen::VectorXd>& data) const;
};

/// 2N x 2N system matrix [[L1,L2],[L4,L3]] with layout (u, theta),
/// forcing (f, g), initial (u0, theta0). Stored in lhs_plus_L form.
BlockOperator block_first_order(const LinearOperator& l1, const LinearOperator& l2,
                                const LinearOperator& l3, const LinearOperator& l4);

/// 4N x 4N companion of the coupled second-order system, rows
/// (0,-1,0,0), (L1,0,L2,0), (0,0,0,-1), (L4,0,L3,0); layout
/// (u, u_t, theta, theta_t), forcing (0, f, 0, g).
BlockOperator block_second_order(const LinearOperator& l1, const LinearOperator& l2,
                                 const LinearOperator& l3, const LinearOperator& l4);

/// 3N x 3N mixed-order system matrix [[0,-1,0],[L1,0,L2],[L4,0,L3]];
/// layout (u, u_t, theta), forcing (0, f, g).
BlockOperator block_mixed(const LinearOperator& l1, const LinearOperator& l2,
                          const LinearOperator& l3, const LinearOperator& l4);

enum class CompanionSign {
    minus_L, // equation D^k u - L u = f, bottom-left block is +L
    plus_L   // equation D^k u + L u = f, bottom-left block is -L
};

/// kN x kN companion reduction of a k-th order scalar-in-time equation to
/// first order: superdiagonal identity blocks, L (signed) bottom-left.
/// Layout (u, Du, ..., D^{k-1}u), forcing (0, ..., 0, f). Already in the
/// normalized evolution form; k = 1 returns the signed L itself.
BlockOperator companion_kth(const LinearOperator& l, int k,
                            CompanionSign sign = CompanionSign::minus_L);

} // namespace qduhamel
