#pragma once

// 2D Delaunay triangulation by divide and conquer on a quad-edge structure
// (Guibas & Stolfi), with exact predicates and symbolic perturbation for cocircular ties.
// Vertices are sorted lexicographically by (x, y) first, so the result does not depend on
// input order.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/pointcloud.hpp"
#include "terrarast/predicates.hpp"

namespace terrarast {

struct Vertex {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// Vertices in (x, y) order with unique xy; triangles are counterclockwise index triples.
struct Triangulation {
    std::vector<Vertex> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
};

namespace delaunay_detail {

class QuadEdgeMesh {
public:
    using Edge = std::uint32_t;

    explicit QuadEdgeMesh(const std::vector<Vertex>& v) : verts_(v) {
        onext_.reserve(v.size() * 12);
        org_.reserve(v.size() * 12);
    }

    static Edge rot(Edge e) { return (e & ~3u) | ((e + 1) & 3u); }
    static Edge sym(Edge e) { return (e & ~3u) | ((e + 2) & 3u); }
    static Edge invrot(Edge e) { return (e & ~3u) | ((e + 3) & 3u); }

    Edge onext(Edge e) const { return onext_[e]; }
    Edge oprev(Edge e) const { return rot(onext_[rot(e)]); }
    Edge lnext(Edge e) const { return rot(onext_[invrot(e)]); }
    Edge rprev(Edge e) const { return onext_[sym(e)]; }
    std::uint32_t org(Edge e) const { return org_[e]; }
    std::uint32_t dest(Edge e) const { return org_[sym(e)]; }
    bool alive(Edge e) const { return alive_[e >> 2]; }
    std::size_t edge_slots() const { return onext_.size(); }

    Edge make_edge(std::uint32_t a, std::uint32_t b) {
        const auto e = static_cast<Edge>(onext_.size());
        onext_.insert(onext_.end(), {e, e + 3, e + 2, e + 1});
        org_.insert(org_.end(), {a, 0, b, 0});
        alive_.push_back(true);
        return e;
    }

    void splice(Edge a, Edge b) {
        const Edge alpha = rot(onext_[a]);
        const Edge beta = rot(onext_[b]);
        std::swap(onext_[a], onext_[b]);
        std::swap(onext_[alpha], onext_[beta]);
    }

    Edge connect(Edge a, Edge b) {
        const Edge e = make_edge(dest(a), org(b));
        splice(e, lnext(a));
        splice(sym(e), b);
        return e;
    }

    void remove(Edge e) {
        splice(e, oprev(e));
        splice(sym(e), oprev(sym(e)));
        alive_[e >> 2] = false;
    }

    geom::Point2 pt(std::uint32_t v) const { return {verts_[v].x, verts_[v].y}; }
    bool ccw(std::uint32_t a, std::uint32_t b, std::uint32_t c) const { return geom::orient2d(pt(a), pt(b), pt(c)) > 0; }
    bool right_of(std::uint32_t x, Edge e) const { return ccw(x, dest(e), org(e)); }
    bool left_of(std::uint32_t x, Edge e) const { return ccw(x, org(e), dest(e)); }
    bool in_circle(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) const {
        return geom::incircle_perturbed(pt(a), pt(b), pt(c), pt(d), {a, b, c, d}) > 0;
    }

    /// Returns (leftmost outgoing ccw hull edge, rightmost outgoing cw hull edge).
    std::pair<Edge, Edge> build(std::uint32_t lo, std::uint32_t hi) {
        const std::uint32_t n = hi - lo;
        if (n == 2) {
            const Edge a = make_edge(lo, lo + 1);
            return {a, sym(a)};
        }
        if (n == 3) {
            const Edge a = make_edge(lo, lo + 1);
            const Edge b = make_edge(lo + 1, lo + 2);
            splice(sym(a), b);
            if (ccw(lo, lo + 1, lo + 2)) {
                connect(b, a);
                return {a, sym(b)};
            }
            if (ccw(lo, lo + 2, lo + 1)) {
                const Edge c = connect(b, a);
                return {sym(c), c};
            }
            return {a, sym(b)};
        }
        const std::uint32_t mid = lo + n / 2;
        auto [ldo, ldi] = build(lo, mid);
        auto [rdi, rdo] = build(mid, hi);
        while (true) {
            if (left_of(org(rdi), ldi)) {
                ldi = lnext(ldi);
            } else if (right_of(org(ldi), rdi)) {
                rdi = rprev(rdi);
            } else {
                break;
            }
        }
        Edge basel = connect(sym(rdi), ldi);
        if (org(ldi) == org(ldo)) ldo = sym(basel);
        if (org(rdi) == org(rdo)) rdo = basel;
        const auto valid = [&](Edge e) { return right_of(dest(e), basel); };
        while (true) {
            Edge lcand = onext(sym(basel));
            if (valid(lcand)) {
                while (in_circle(dest(basel), org(basel), dest(lcand), dest(onext(lcand)))) {
                    const Edge t = onext(lcand);
                    remove(lcand);
                    lcand = t;
                }
            }
            Edge rcand = oprev(basel);
            if (valid(rcand)) {
                while (in_circle(dest(basel), org(basel), dest(rcand), dest(oprev(rcand)))) {
                    const Edge t = oprev(rcand);
                    remove(rcand);
                    rcand = t;
                }
            }
            const bool lv = valid(lcand), rv = valid(rcand);
            if (!lv && !rv) break;
            if (!lv || (rv && in_circle(dest(lcand), org(lcand), org(rcand), dest(rcand)))) {
                basel = connect(rcand, sym(basel));
            } else {
                basel = connect(sym(basel), sym(lcand));
            }
        }
        return {ldo, rdo};
    }

    std::vector<std::array<std::uint32_t, 3>> triangles() const {
        std::vector<std::array<std::uint32_t, 3>> tris;
        std::vector<bool> seen(onext_.size(), false);
        for (Edge e = 0; e < onext_.size(); e += 2) {
            if ((e & 1u) || !alive(e) || seen[e]) continue;
            const Edge e1 = lnext(e), e2 = lnext(e1);
            if (lnext(e2) != e) continue;
            seen[e] = seen[e1] = seen[e2] = true;
            const auto a = org(e), b = org(e1), c = org(e2);
            if (!ccw(a, b, c)) continue;
            // rotate so the smallest index comes first
            std::array<std::uint32_t, 3> t{a, b, c};
            std::rotate(t.begin(), std::min_element(t.begin(), t.end()), t.end());
            tris.push_back(t);
        }
        std::sort(tris.begin(), tris.end());
        return tris;
    }

private:
    const std::vector<Vertex>& verts_;
    std::vector<Edge> onext_;
    std::vector<std::uint32_t> org_;
    std::vector<bool> alive_;
};

}  // namespace delaunay_detail

/// Delaunay triangulation of xy vertices carrying z. Points with identical xy collapse into
/// one vertex with the minimum z.
[[nodiscard]] inline Triangulation delaunay(std::vector<Vertex> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vertex& a, const Vertex& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.z < b.z;
    });
    std::vector<Vertex> verts;
    verts.reserve(pts.size());
    for (const auto& p : pts) {
        if (!verts.empty() && verts.back().x == p.x && verts.back().y == p.y) continue;  // sorted: first has min z
        verts.push_back(p);
    }
    if (verts.size() < 3) throw Error(ErrorCode::DegenerateInput, "need at least 3 distinct xy points, got " + std::to_string(verts.size()));
    if (verts.size() > 0x3FFFFFFFu) throw Error(ErrorCode::InvalidArgument, "too many vertices for 32-bit mesh indices");

    delaunay_detail::QuadEdgeMesh mesh(verts);
    mesh.build(0, static_cast<std::uint32_t>(verts.size()));
    Triangulation tri;
    tri.triangles = mesh.triangles();
    if (tri.triangles.empty()) throw Error(ErrorCode::DegenerateInput, "all points are collinear");
    tri.vertices = std::move(verts);
    return tri;
}

[[nodiscard]] inline Triangulation delaunay(const PointCloud& cloud) {
    std::vector<Vertex> pts;
    pts.reserve(cloud.size());
    for (const auto& p : cloud.points()) pts.push_back({p.x, p.y, p.z});
    return delaunay(std::move(pts));
}

}  // namespace terrarast
