#ifndef PERFHOM_GRID_HPP
#define PERFHOM_GRID_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <vector>

#include "perfhom/perforation.hpp"

namespace perfhom {

enum class NodeMask : uint8_t { fluid = 0, hole = 1, boundary = 2 };

// Vector field on the uniform node grid of D = (0,1)^2 with n cells per side.
// Hole and domain-boundary nodes carry exact zeros for zero-extended fields.
struct GridField {
    int n = 0;
    double h = 0.0;
    std::vector<NodeMask> mask;
    Eigen::VectorXd values;  // 2*(n+1)^2, node-major [u1, u2]

    GridField() = default;
    explicit GridField(int n_, const PerforationSpec* perf = nullptr) : n(n_), h(1.0 / n_) {
        mask.assign(size_t(n + 1) * (n + 1), NodeMask::fluid);
        values = Eigen::VectorXd::Zero(2 * size_t(n + 1) * (n + 1));
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                if (i == 0 || j == 0 || i == n || j == n)
                    mask[idx(i, j)] = NodeMask::boundary;
                else if (perf && perf->in_hole(point(i, j)))
                    mask[idx(i, j)] = NodeMask::hole;
            }
    }

    size_t idx(int i, int j) const { return size_t(j) * (n + 1) + i; }
    Eigen::Vector2d point(int i, int j) const { return {i * h, j * h}; }
    bool fluid(int i, int j) const { return mask[idx(i, j)] == NodeMask::fluid; }

    Eigen::Vector2d at(int i, int j) const {
        size_t q = 2 * idx(i, j);
        return {values[q], values[q + 1]};
    }
    void set(int i, int j, const Eigen::Vector2d& v) {
        size_t q = 2 * idx(i, j);
        values[q] = v.x();
        values[q + 1] = v.y();
    }

    void fill(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& f,
              bool respect_mask = true) {
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                if (respect_mask && !fluid(i, j)) continue;
                set(i, j, f(point(i, j)));
            }
    }

    double l2_norm() const {
        double acc = 0.0;
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) acc += at(i, j).squaredNorm();
        return std::sqrt(acc * h * h);
    }

    // forward differences; fluid_edges_only skips edges touching masked nodes
    double h1_seminorm(bool fluid_edges_only = true) const {
        double acc = 0.0;
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                if (i + 1 <= n) {
                    bool ok = !fluid_edges_only || (fluid(i, j) && fluid(i + 1, j));
                    if (ok) acc += (at(i + 1, j) - at(i, j)).squaredNorm();
                }
                if (j + 1 <= n) {
                    bool ok = !fluid_edges_only || (fluid(i, j) && fluid(i, j + 1));
                    if (ok) acc += (at(i, j + 1) - at(i, j)).squaredNorm();
                }
            }
        return std::sqrt(acc);  // h^2 from the area weight cancels 1/h^2 of the difference
    }

    GridField& operator+=(const GridField& o) {
        values += o.values;
        return *this;
    }
    GridField& operator-=(const GridField& o) {
        values -= o.values;
        return *this;
    }
    GridField& operator*=(double s) {
        values *= s;
        return *this;
    }
};

// flat binary export: magic, n, h, mask bytes, values
inline void export_grid(const GridField& g, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("export_grid: cannot open " + path);
    const char magic[4] = {'P', 'H', 'G', 'R'};
    f.write(magic, 4);
    int32_t n = g.n;
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.write(reinterpret_cast<const char*>(&g.h), 8);
    f.write(reinterpret_cast<const char*>(g.mask.data()), std::streamsize(g.mask.size()));
    f.write(reinterpret_cast<const char*>(g.values.data()),
            std::streamsize(sizeof(double) * g.values.size()));
}

// one horizontal slice as CSV (x, u1, u2, mask) for plotting
inline void export_grid_slice_csv(const GridField& g, int j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("export_grid_slice_csv: cannot open " + path);
    f << "# perfhom-grid-slice j=" << j << " y=" << j * g.h << "\n";
    f << "x,u1,u2,mask\n";
    for (int i = 0; i <= g.n; ++i) {
        Eigen::Vector2d v = g.at(i, j);
        f << i * g.h << "," << v.x() << "," << v.y() << "," << int(g.mask[g.idx(i, j)]) << "\n";
    }
}

}  // namespace perfhom

#endif
