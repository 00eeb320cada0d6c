#include "qduhamel/operators.hpp"

#include <algorithm>
#include <cmath>

namespace qduhamel {

LinearOperator LinearOperator::scalar(double lambda, std::string label) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = lambda;
    return {std::move(m), std::move(label), {}};
}

LinearOperator LinearOperator::zero(Eigen::Index n, std::string label) {
    return {Eigen::MatrixXd::Zero(n, n), std::move(label), {}};
}

LinearOperator LinearOperator::identity(Eigen::Index n, std::string label) {
    return {Eigen::MatrixXd::Identity(n, n), std::move(label), {}};
}

LinearOperator LinearOperator::dense(Eigen::MatrixXd m, std::string label) {
    if (m.rows() != m.cols()) {
        throw ConfigError("operator matrix must be square");
    }
    if (!m.allFinite()) {
        throw ConfigError("operator matrix must have finite entries");
    }
    return {std::move(m), std::move(label), {}};
}

SpatialGrid::SpatialGrid(std::vector<double> points, QParam q)
    : q_(q), points_(std::move(points)) {
    if (points_.empty()) {
        throw ConfigError("grid must contain at least one point");
    }
    std::sort(points_.begin(), points_.end());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i] == 0.0 || !std::isfinite(points_[i])) {
            throw ConfigError("grid points must be finite and nonzero");
        }
        if (i > 0 && detail::nearly_equal(points_[i - 1], points_[i])) {
            throw ConfigError("grid points must be distinct");
        }
    }
    symmetric_ = true;
    for (double x : points_) {
        if (!index_of(-x)) {
            symmetric_ = false;
            break;
        }
    }
}

std::optional<int> SpatialGrid::index_of(double x) const {
    for (int i = 0; i < size(); ++i) {
        if (detail::nearly_equal(points_[static_cast<std::size_t>(i)], x)) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<int> SpatialGrid::q_image(int i) const {
    return index_of(q_.value() * point(i));
}

LinearOperator assemble_jackson_dx(const SpatialGrid& grid) {
    const int n = grid.size();
    const double one_minus_q = grid.q().one_minus();
    LinearOperator out;
    out.mat = Eigen::MatrixXd::Zero(n, n);
    out.label = "jackson_dx";
    out.interior_rows.assign(static_cast<std::size_t>(n), true);
    for (int i = 0; i < n; ++i) {
        const double x = grid.point(i);
        const double c = 1.0 / (x * one_minus_q);
        out.mat(i, i) += c;
        if (auto j = grid.q_image(i)) {
            out.mat(i, *j) -= c;
        } else {
            out.interior_rows[static_cast<std::size_t>(i)] = false;
        }
    }
    return out;
}

LinearOperator assemble_rubin_dx(const SpatialGrid& grid) {
    if (!grid.symmetric()) {
        throw ConfigError("rubin_dx requires a grid closed under negation");
    }
    const int n = grid.size();
    const double q = grid.q().value();
    const double one_minus_q = grid.q().one_minus();
    LinearOperator out;
    out.mat = Eigen::MatrixXd::Zero(n, n);
    out.label = "rubin_dx";
    out.interior_rows.assign(static_cast<std::size_t>(n), true);
    for (int i = 0; i < n; ++i) {
        const double x = grid.point(i);
        const double c = 1.0 / (2.0 * x * one_minus_q);
        // stencil points and signs, in printed order
        const std::pair<double, double> stencil[] = {
            {x / q, 1.0}, {-x / q, 1.0}, {q * x, -1.0}, {-q * x, 1.0}, {-x, -2.0}};
        for (const auto& [p, sign] : stencil) {
            if (auto j = grid.index_of(p)) {
                out.mat(i, *j) += sign * c;
            } else {
                out.interior_rows[static_cast<std::size_t>(i)] = false;
            }
        }
    }
    return out;
}

Eigen::Index BlockLayout::dim() const {
    Eigen::Index total = 0;
    for (const auto& c : components) {
        total += c.size;
    }
    return total;
}

const BlockLayout::Component& BlockLayout::find(std::string_view name) const {
    for (const auto& c : components) {
        if (c.name == name) {
            return c;
        }
    }
    throw ConfigError("unknown layout component '" + std::string(name) + "'");
}

Eigen::MatrixXd BlockOperator::normalized_a() const {
    return form == SystemForm::evolution_rhs ? op.mat : Eigen::MatrixXd(-op.mat);
}

Eigen::VectorXd BlockOperator::extract(const Eigen::VectorXd& state,
                                       std::string_view name) const {
    if (state.size() != dim()) {
        throw ConfigError("state vector does not match block dimension");
    }
    const auto& c = layout.find(name);
    return state.segment(c.offset, c.size);
}

Eigen::VectorXd BlockOperator::assemble_forcing(
    const std::vector<Eigen::VectorXd>& inputs) const {
    if (inputs.size() != layout.forcing_slots.size()) {
        throw ConfigError("forcing input count does not match layout");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
    for (std::size_t j = 0; j < inputs.size(); ++j) {
        const auto& c = layout.components[static_cast<std::size_t>(layout.forcing_slots[j])];
        if (inputs[j].size() != c.size) {
            throw ConfigError("forcing input dimension does not match component");
        }
        out.segment(c.offset, c.size) = inputs[j];
    }
    return out;
}

Eigen::VectorXd BlockOperator::stack_initial(
    const std::vector<Eigen::VectorXd>& data) const {
    if (data.size() != layout.components.size()) {
        throw ConfigError("initial data count does not match layout");
    }
    Eigen::VectorXd out(dim());
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto& c = layout.components[j];
        if (data[j].size() != c.size) {
            throw ConfigError("initial datum dimension does not match component");
        }
        out.segment(c.offset, c.size) = data[j];
    }
    return out;
}

namespace {

Eigen::Index common_block_dim(const LinearOperator& l1, const LinearOperator& l2,
                              const LinearOperator& l3, const LinearOperator& l4) {
    const Eigen::Index n = l1.dim();
    if (l2.dim() != n || l3.dim() != n || l4.dim() != n) {
        throw ConfigError("block operators must share one dimension");
    }
    return n;
}

BlockLayout make_layout(std::vector<std::string> names, Eigen::Index block_size,
                        std::vector<int> forcing_slots) {
    BlockLayout layout;
    Eigen::Index offset = 0;
    for (auto& name : names) {
        layout.components.push_back({std::move(name), offset, block_size});
        offset += block_size;
    }
    layout.forcing_slots = std::move(forcing_slots);
    return layout;
}

} // namespace

BlockOperator block_first_order(const LinearOperator& l1, const LinearOperator& l2,
                                const LinearOperator& l3, const LinearOperator& l4) {
    const Eigen::Index n = common_block_dim(l1, l2, l3, l4);
    BlockOperator out;
    out.op.mat = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    out.op.mat.block(0, 0, n, n) = l1.mat;
    out.op.mat.block(0, n, n, n) = l2.mat;
    out.op.mat.block(n, 0, n, n) = l4.mat;
    out.op.mat.block(n, n, n, n) = l3.mat;
    out.op.label = "coupled_first_order";
    out.layout = make_layout({"u", "theta"}, n, {0, 1});
    out.form = SystemForm::lhs_plus_L;
    return out;
}

BlockOperator block_second_order(const LinearOperator& l1, const LinearOperator& l2,
                                 const LinearOperator& l3, const LinearOperator& l4) {
    const Eigen::Index n = common_block_dim(l1, l2, l3, l4);
    BlockOperator out;
    out.op.mat = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    const Eigen::MatrixXd minus_i = -Eigen::MatrixXd::Identity(n, n);
    out.op.mat.block(0, n, n, n) = minus_i;
    out.op.mat.block(n, 0, n, n) = l1.mat;
    out.op.mat.block(n, 2 * n, n, n) = l2.mat;
    out.op.mat.block(2 * n, 3 * n, n, n) = minus_i;
    out.op.mat.block(3 * n, 0, n, n) = l4.mat;
    out.op.mat.block(3 * n, 2 * n, n, n) = l3.mat;
    out.op.label = "coupled_second_order";
    out.layout = make_layout({"u", "u_t", "theta", "theta_t"}, n, {1, 3});
    out.form = SystemForm::lhs_plus_L;
    return out;
}

BlockOperator block_mixed(const LinearOperator& l1, const LinearOperator& l2,
                          const LinearOperator& l3, const LinearOperator& l4) {
    const Eigen::Index n = common_block_dim(l1, l2, l3, l4);
    BlockOperator out;
    out.op.mat = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    out.op.mat.block(0, n, n, n) = -Eigen::MatrixXd::Identity(n, n);
    out.op.mat.block(n, 0, n, n) = l1.mat;
    out.op.mat.block(n, 2 * n, n, n) = l2.mat;
    out.op.mat.block(2 * n, 0, n, n) = l4.mat;
    out.op.mat.block(2 * n, 2 * n, n, n) = l3.mat;
    out.op.label = "coupled_mixed";
    out.layout = make_layout({"u", "u_t", "theta"}, n, {1, 2});
    out.form = SystemForm::lhs_plus_L;
    return out;
}

BlockOperator companion_kth(const LinearOperator& l, int k, CompanionSign sign) {
    if (k < 1) {
        throw ConfigError("companion reduction requires order k >= 1");
    }
    const Eigen::Index n = l.dim();
    const double s = sign == CompanionSign::minus_L ? 1.0 : -1.0;
    BlockOperator out;
    out.form = SystemForm::evolution_rhs;
    out.op.label = "companion_k" + std::to_string(k);

    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        if (j == 0) {
            names.emplace_back("u");
        } else if (j == 1) {
            names.emplace_back("Du");
        } else {
            names.emplace_back("D" + std::to_string(j) + "u");
        }
    }
    out.layout = make_layout(std::move(names), n, {k - 1});

    if (k == 1) {
        out.op.mat = s * l.mat;
        return out;
    }
    out.op.mat = Eigen::MatrixXd::Zero(k * n, k * n);
    for (int j = 0; j + 1 < k; ++j) {
        out.op.mat.block(j * n, (j + 1) * n, n, n) = Eigen::MatrixXd::Identity(n, n);
    }
    out.op.mat.block((k - 1) * n, 0, n, n) = s * l.mat;
    return out;
}

} // namespace qduhamel
