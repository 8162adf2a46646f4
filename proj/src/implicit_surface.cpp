#include "isoshell/implicit_surface.hpp"

#include "isoshell/error.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace isoshell {

namespace {

FourierTerm product(double c, std::initializer_list<TrigFactor> f) {
    return FourierTerm{c, std::vector<TrigFactor>(f)};
}

TrigFactor cos_(int axis, int k = 1) { return {Trig::Cos, axis, k}; }

} // namespace

double ImplicitSurface::operator()(const Vec3& p) const {
    const double w = 2.0 * std::numbers::pi / period;
    double value = constant + linear.dot(p);
    for (const auto& term : terms) {
        double prod = term.coefficient;
        for (const auto& f : term.factors) {
            const double arg = w * f.multiple * p[f.axis];
            prod *= (f.fn == Trig::Cos) ? std::cos(arg) : std::sin(arg);
        }
        value += prod;
    }
    return value;
}

double evaluate_implicit(const ImplicitSurface& surface, const Vec3& p) { return surface(p); }

ImplicitSurface make_preset(std::string_view name, double period) {
    ImplicitSurface s;
    s.name = std::string(name);
    s.period = period;
    if (name == "iwp") {
        // 2(cx cy + cy cz + cz cx) - (c2x + c2y + c2z)
        s.terms = {product(2, {cos_(0), cos_(1)}), product(2, {cos_(1), cos_(2)}),
                   product(2, {cos_(2), cos_(0)}), product(-1, {cos_(0, 2)}),
                   product(-1, {cos_(1, 2)}),      product(-1, {cos_(2, 2)})};
    } else if (name == "frd") {
        // 4 cx cy cz - (c2x c2y + c2y c2z + c2z c2x)
        s.terms = {product(4, {cos_(0), cos_(1), cos_(2)}), product(-1, {cos_(0, 2), cos_(1, 2)}),
                   product(-1, {cos_(1, 2), cos_(2, 2)}), product(-1, {cos_(2, 2), cos_(0, 2)})};
    } else if (name == "n") {
        // 3(cx + cy + cz) + 4 cx cy cz
        s.terms = {product(3, {cos_(0)}), product(3, {cos_(1)}), product(3, {cos_(2)}),
                   product(4, {cos_(0), cos_(1), cos_(2)})};
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown surface preset '" + std::string(name) + "'");
    }
    return s;
}

std::vector<std::string> preset_names() { return {"iwp", "frd", "n"}; }

ImplicitSurface make_plane(double height, double period) {
    ImplicitSurface s;
    s.name = "plane";
    s.period = period;
    s.linear = Vec3(0, 0, 1);
    s.constant = -height;
    return s;
}

std::vector<Eigen::Matrix3d> cubic_symmetry_operations() {
    static const std::array<std::array<int, 3>, 6> perms = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    std::vector<Eigen::Matrix3d> ops;
    ops.reserve(48);
    for (const auto& p : perms) {
        for (int signs = 0; signs < 8; ++signs) {
            Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
            for (int r = 0; r < 3; ++r) m(r, p[r]) = (signs >> r & 1) ? -1.0 : 1.0;
            ops.push_back(m);
        }
    }
    return ops;
}

} // namespace isoshell
