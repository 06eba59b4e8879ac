#include "focs/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "focs/errors.hpp"

namespace focs {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 sub3(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

Vec3 as_vec3(std::span<const double> p) {
    Vec3 v{0.0, 0.0, 0.0};
    for (std::size_t c = 0; c < p.size() && c < 3; ++c) v[c] = p[c];
    return v;
}

double cross2(double ox, double oy, double ax, double ay, double bx, double by) {
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

// Andrew's monotone chain over point indices; returns counterclockwise hull
// indices with strictly convex turns (collinear boundary points dropped).
std::vector<std::size_t> chain_2d(const std::vector<std::array<double, 2>>& pts) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a][0] != pts[b][0]) return pts[a][0] < pts[b][0];
        return pts[a][1] < pts[b][1];
    });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](std::size_t a, std::size_t b) { return pts[a] == pts[b]; }),
                order.end());
    const std::size_t n = order.size();
    if (n <= 2) return order;

    std::vector<std::size_t> hull(2 * n);
    std::size_t h = 0;
    for (std::size_t t = 0; t < n; ++t) {  // lower
        const std::size_t i = order[t];
        while (h >= 2 && cross2(pts[hull[h - 2]][0], pts[hull[h - 2]][1], pts[hull[h - 1]][0],
                                pts[hull[h - 1]][1], pts[i][0], pts[i][1]) <= 0.0) {
            --h;
        }
        hull[h++] = i;
    }
    const std::size_t lower = h + 1;
    for (std::size_t t = n - 1; t-- > 0;) {  // upper
        const std::size_t i = order[t];
        while (h >= lower && cross2(pts[hull[h - 2]][0], pts[hull[h - 2]][1], pts[hull[h - 1]][0],
                                    pts[hull[h - 1]][1], pts[i][0], pts[i][1]) <= 0.0) {
            --h;
        }
        hull[h++] = i;
    }
    hull.resize(h - 1);  // last point repeats the first
    return hull;
}

double point_segment_distance(std::span<const double> p, std::span<const double> a,
                              std::span<const double> b) {
    double ab2 = 0.0, apab = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        const double e = b[c] - a[c];
        ab2 += e * e;
        apab += (p[c] - a[c]) * e;
    }
    const double t = ab2 > 0.0 ? std::clamp(apab / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        const double diff = p[c] - (a[c] + t * (b[c] - a[c]));
        d2 += diff * diff;
    }
    return std::sqrt(d2);
}

// Ericson's region-based closest point on a triangle.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = sub3(b, a), ac = sub3(c, a), ap = sub3(p, a);
    const double d1 = dot3(ab, ap), d2 = dot3(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return norm3(ap);
    const Vec3 bp = sub3(p, b);
    const double d3 = dot3(ab, bp), d4 = dot3(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return norm3(bp);
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return norm3({ap[0] - v * ab[0], ap[1] - v * ab[1], ap[2] - v * ab[2]});
    }
    const Vec3 cp = sub3(p, c);
    const double d5 = dot3(ab, cp), d6 = dot3(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return norm3(cp);
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return norm3({ap[0] - w * ac[0], ap[1] - w * ac[1], ap[2] - w * ac[2]});
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        const Vec3 bc = sub3(c, b);
        return norm3({bp[0] - w * bc[0], bp[1] - w * bc[1], bp[2] - w * bc[2]});
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    const Vec3 q{a[0] + v * ab[0] + w * ac[0], a[1] + v * ab[1] + w * ac[1],
                 a[2] + v * ab[2] + w * ac[2]};
    return norm3(sub3(p, q));
}

double bbox_scale(const std::vector<std::vector<double>>& points) {
    double scale = 0.0;
    const std::size_t d = points[0].size();
    for (std::size_t c = 0; c < d; ++c) {
        double lo = points[0][c], hi = points[0][c];
        for (const auto& p : points) {
            lo = std::min(lo, p[c]);
            hi = std::max(hi, p[c]);
        }
        scale = std::max(scale, hi - lo);
    }
    return std::max(scale, 1e-30);
}

ConvexHull hull_1d(const std::vector<std::vector<double>>& points) {
    double lo = points[0][0], hi = points[0][0];
    for (const auto& p : points) {
        lo = std::min(lo, p[0]);
        hi = std::max(hi, p[0]);
    }
    ConvexHull h;
    h.dim = 1;
    if (lo == hi) {
        h.intrinsic_dim = 0;
        h.vertices = {{lo}};
    } else {
        h.intrinsic_dim = 1;
        h.vertices = {{lo}, {hi}};
    }
    return h;
}

ConvexHull hull_2d(const std::vector<std::vector<double>>& points) {
    std::vector<std::array<double, 2>> pts(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) pts[i] = {points[i][0], points[i][1]};
    const auto idx = chain_2d(pts);
    ConvexHull h;
    h.dim = 2;
    h.intrinsic_dim = idx.size() >= 3 ? 2 : (idx.size() == 2 ? 1 : 0);
    h.vertices.reserve(idx.size());
    for (std::size_t i : idx) h.vertices.push_back(points[i]);
    return h;
}

// Planar point set in ambient dimension 3: hull in the (u, v) frame.
ConvexHull hull_coplanar_3d(const std::vector<std::vector<double>>& points, const Vec3& origin,
                            const Vec3& u, const Vec3& v) {
    std::vector<std::array<double, 2>> plane(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 w = sub3(as_vec3(points[i]), origin);
        plane[i] = {dot3(w, u), dot3(w, v)};
    }
    const auto idx = chain_2d(plane);
    ConvexHull h;
    h.dim = 3;
    h.intrinsic_dim = idx.size() >= 3 ? 2 : (idx.size() == 2 ? 1 : 0);
    for (std::size_t i : idx) h.vertices.push_back(points[i]);
    return h;
}

ConvexHull hull_3d(const std::vector<std::vector<double>>& points) {
    const double tol = 1e-9 * bbox_scale(points);
    std::vector<Vec3> p(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) p[i] = as_vec3(points[i]);
    const std::size_t n = p.size();

    ConvexHull h;
    h.dim = 3;

    // Seed simplex: farthest point pair, then max line offset, then max
    // plane offset; each failure collapses to a lower-dimensional hull.
    std::size_t i1 = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = norm3(sub3(p[i], p[0]));
        if (d > best) {
            best = d;
            i1 = i;
        }
    }
    if (best <= tol) {
        h.intrinsic_dim = 0;
        h.vertices = {points[0]};
        return h;
    }
    const Vec3 axis = sub3(p[i1], p[0]);
    const double axis_len = norm3(axis);
    const Vec3 u{axis[0] / axis_len, axis[1] / axis_len, axis[2] / axis_len};

    std::size_t i2 = 0;
    best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 w = sub3(p[i], p[0]);
        const double along = dot3(w, u);
        const Vec3 off{w[0] - along * u[0], w[1] - along * u[1], w[2] - along * u[2]};
        const double d = norm3(off);
        if (d > best) {
            best = d;
            i2 = i;
        }
    }
    if (best <= tol) {
        // Collinear: extreme projections along the axis.
        double lo = 0.0, hi = 0.0;
        std::size_t ilo = 0, ihi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double along = dot3(sub3(p[i], p[0]), u);
            if (along < lo) {
                lo = along;
                ilo = i;
            }
            if (along > hi) {
                hi = along;
                ihi = i;
            }
        }
        h.intrinsic_dim = 1;
        h.vertices = {points[ilo], points[ihi]};
        return h;
    }
    Vec3 w2 = sub3(p[i2], p[0]);
    const double along2 = dot3(w2, u);
    Vec3 v{w2[0] - along2 * u[0], w2[1] - along2 * u[1], w2[2] - along2 * u[2]};
    const double vlen = norm3(v);
    v = {v[0] / vlen, v[1] / vlen, v[2] / vlen};
    const Vec3 normal = cross3(u, v);

    std::size_t i3 = 0;
    best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(dot3(sub3(p[i], p[0]), normal));
        if (d > best) {
            best = d;
            i3 = i;
        }
    }
    if (best <= tol) return hull_coplanar_3d(points, p[0], u, v);

    // Initial tetrahedron 0, i1, i2, i3 with outward-oriented faces.
    std::vector<std::array<std::size_t, 3>> faces;
    auto outward = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t opposite) {
        const Vec3 nrm = cross3(sub3(p[b], p[a]), sub3(p[c], p[a]));
        if (dot3(nrm, sub3(p[opposite], p[a])) > 0.0) {
            faces.push_back({a, c, b});
        } else {
            faces.push_back({a, b, c});
        }
    };
    outward(0, i1, i2, i3);
    outward(0, i1, i3, i2);
    outward(0, i2, i3, i1);
    outward(i1, i2, i3, 0);

    auto face_offset = [&](const std::array<std::size_t, 3>& f, const Vec3& q) {
        const Vec3 nrm = cross3(sub3(p[f[1]], p[f[0]]), sub3(p[f[2]], p[f[0]]));
        const double len = norm3(nrm);
        return dot3(nrm, sub3(q, p[f[0]])) / std::max(len, 1e-300);
    };

    std::vector<char> used(n, 0);
    used[0] = used[i1] = used[i2] = used[i3] = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        used[i] = 1;
        std::vector<std::size_t> visible;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (face_offset(faces[f], p[i]) > tol) visible.push_back(f);
        }
        if (visible.empty()) continue;  // interior (or within tolerance)

        std::set<std::pair<std::size_t, std::size_t>> visible_edges;
        for (std::size_t f : visible) {
            const auto& fc = faces[f];
            for (int e = 0; e < 3; ++e) {
                visible_edges.emplace(fc[e], fc[(e + 1) % 3]);
            }
        }
        std::vector<std::array<std::size_t, 3>> next;
        next.reserve(faces.size());
        std::vector<char> is_visible(faces.size(), 0);
        for (std::size_t f : visible) is_visible[f] = 1;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (!is_visible[f]) next.push_back(faces[f]);
        }
        for (const auto& [a, b] : visible_edges) {
            // Horizon edge: its reverse belongs to a face that survives.
            if (!visible_edges.count({b, a})) next.push_back({a, b, i});
        }
        faces = std::move(next);
    }

    std::vector<std::size_t> remap(n, NetworkTopology::npos);
    for (const auto& f : faces) {
        for (std::size_t idx : f) {
            if (remap[idx] == NetworkTopology::npos) {
                remap[idx] = h.vertices.size();
                h.vertices.push_back(points[idx]);
            }
        }
    }
    h.faces.reserve(faces.size());
    for (const auto& f : faces) {
        h.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
    }
    h.intrinsic_dim = 3;
    return h;
}

// Inside test for a counterclockwise polygon given as (x, y) pairs.
bool inside_ccw_polygon(double x, double y, const std::vector<std::array<double, 2>>& poly) {
    const std::size_t n = poly.size();
    for (std::size_t e = 0; e < n; ++e) {
        const auto& a = poly[e];
        const auto& b = poly[(e + 1) % n];
        if (cross2(a[0], a[1], b[0], b[1], x, y) < 0.0) return false;
    }
    return true;
}

}  // namespace

ConvexHull convex_hull(const std::vector<std::vector<double>>& points) {
    if (points.empty()) throw std::invalid_argument("convex_hull: at least one point required");
    const std::size_t d = points[0].size();
    if (d < 1 || d > 3) {
        std::ostringstream os;
        os << "convex_hull: dimension " << d << " unsupported (exact hulls cover 1..3)";
        throw std::invalid_argument(os.str());
    }
    for (const auto& pt : points) {
        if (pt.size() != d) throw std::invalid_argument("convex_hull: mixed point dimensions");
        for (double v : pt) {
            if (!std::isfinite(v)) throw std::invalid_argument("convex_hull: non-finite point");
        }
    }
    switch (d) {
        case 1: return hull_1d(points);
        case 2: return hull_2d(points);
        default: return hull_3d(points);
    }
}

double hull_distance(std::span<const double> point, const ConvexHull& hull) {
    if (point.size() != hull.dim) {
        throw std::invalid_argument("hull_distance: dimension mismatch");
    }
    if (hull.vertices.empty()) throw std::invalid_argument("hull_distance: empty hull");

    if (hull.intrinsic_dim == 0) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < point.size(); ++c) {
            const double diff = point[c] - hull.vertices[0][c];
            d2 += diff * diff;
        }
        return std::sqrt(d2);
    }
    if (hull.intrinsic_dim == 1) {
        if (hull.dim == 1) {
            const double lo = hull.vertices[0][0], hi = hull.vertices[1][0];
            if (point[0] < lo) return lo - point[0];
            if (point[0] > hi) return point[0] - hi;
            return 0.0;
        }
        return point_segment_distance(point, hull.vertices[0], hull.vertices[1]);
    }
    if (hull.intrinsic_dim == 2 && hull.dim == 2) {
        std::vector<std::array<double, 2>> poly(hull.vertices.size());
        for (std::size_t i = 0; i < hull.vertices.size(); ++i) {
            poly[i] = {hull.vertices[i][0], hull.vertices[i][1]};
        }
        if (inside_ccw_polygon(point[0], point[1], poly)) return 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < hull.vertices.size(); ++e) {
            best = std::min(best, point_segment_distance(point, hull.vertices[e],
                                                         hull.vertices[(e + 1) % hull.vertices.size()]));
        }
        return best;
    }
    if (hull.intrinsic_dim == 2 && hull.dim == 3) {
        // Planar polygon in space: split into the in-plane part and offset.
        const Vec3 o = as_vec3(hull.vertices[0]);
        Vec3 u = sub3(as_vec3(hull.vertices[1]), o);
        const double ulen = norm3(u);
        u = {u[0] / ulen, u[1] / ulen, u[2] / ulen};
        Vec3 w = sub3(as_vec3(hull.vertices[2]), o);
        const double along = dot3(w, u);
        Vec3 v{w[0] - along * u[0], w[1] - along * u[1], w[2] - along * u[2]};
        const double vlen = norm3(v);
        v = {v[0] / vlen, v[1] / vlen, v[2] / vlen};
        const Vec3 nrm = cross3(u, v);

        const Vec3 q = sub3(as_vec3(point), o);
        const double off = dot3(q, nrm);
        std::vector<std::array<double, 2>> poly(hull.vertices.size());
        for (std::size_t i = 0; i < hull.vertices.size(); ++i) {
            const Vec3 wi = sub3(as_vec3(hull.vertices[i]), o);
            poly[i] = {dot3(wi, u), dot3(wi, v)};
        }
        if (inside_ccw_polygon(dot3(q, u), dot3(q, v), poly)) return std::abs(off);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < hull.vertices.size(); ++e) {
            best = std::min(best, point_segment_distance(point, hull.vertices[e],
                                                         hull.vertices[(e + 1) % hull.vertices.size()]));
        }
        return best;
    }

    // Solid 3-polytope.
    const Vec3 q = as_vec3(point);
    bool inside = true;
    for (const auto& f : hull.faces) {
        const Vec3 a = as_vec3(hull.vertices[f[0]]);
        const Vec3 nrm = cross3(sub3(as_vec3(hull.vertices[f[1]]), a),
                                sub3(as_vec3(hull.vertices[f[2]]), a));
        if (dot3(nrm, sub3(q, a)) > 0.0) {
            inside = false;
            break;
        }
    }
    if (inside) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : hull.faces) {
        best = std::min(best, point_triangle_distance(q, as_vec3(hull.vertices[f[0]]),
                                                      as_vec3(hull.vertices[f[1]]),
                                                      as_vec3(hull.vertices[f[2]])));
    }
    return best;
}

bool point_in_hull(std::span<const double> point, const ConvexHull& hull, double tol) {
    return hull_distance(point, hull) <= tol;
}

double hull_volume(const ConvexHull& hull) {
    if (hull.vertices.empty()) throw std::invalid_argument("hull_volume: empty hull");
    if (hull.dim > 3) throw std::invalid_argument("hull_volume: dimension unsupported");
    if (hull.intrinsic_dim < static_cast<int>(hull.dim)) return 0.0;
    if (hull.dim == 1) return hull.vertices[1][0] - hull.vertices[0][0];
    if (hull.dim == 2) {
        double twice = 0.0;
        const std::size_t n = hull.vertices.size();
        for (std::size_t e = 0; e < n; ++e) {
            const auto& a = hull.vertices[e];
            const auto& b = hull.vertices[(e + 1) % n];
            twice += a[0] * b[1] - b[0] * a[1];
        }
        return std::abs(twice) / 2.0;
    }
    const Vec3 r = as_vec3(hull.vertices[0]);
    double six = 0.0;
    for (const auto& f : hull.faces) {
        const Vec3 a = sub3(as_vec3(hull.vertices[f[0]]), r);
        const Vec3 b = sub3(as_vec3(hull.vertices[f[1]]), r);
        const Vec3 c = sub3(as_vec3(hull.vertices[f[2]]), r);
        six += dot3(a, cross3(b, c));
    }
    return std::abs(six) / 6.0;
}

std::vector<double> spread(const StateSet& states) {
    if (states.count == 0) throw std::invalid_argument("spread: empty state set");
    std::vector<double> out(states.dim);
    for (std::size_t c = 0; c < states.dim; ++c) {
        double lo = states.row(0)[c], hi = lo;
        for (std::size_t i = 1; i < states.count; ++i) {
            const double v = states.row(i)[c];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out[c] = hi - lo;
    }
    return out;
}

namespace {

// Area of the 2-d convex hull of agent rows, scratch reused across records.
double convex_area_2d(std::span<const double> flat, std::size_t count,
                      std::vector<std::array<double, 2>>& pts) {
    pts.resize(count);
    for (std::size_t i = 0; i < count; ++i) pts[i] = {flat[2 * i], flat[2 * i + 1]};
    const auto idx = chain_2d(pts);
    if (idx.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t e = 0; e < idx.size(); ++e) {
        const auto& a = pts[idx[e]];
        const auto& b = pts[idx[(e + 1) % idx.size()]];
        twice += a[0] * b[1] - b[0] * a[1];
    }
    return std::abs(twice) / 2.0;
}

std::vector<std::vector<double>> collect_points(const TrajectoryRecord& t, std::size_t record,
                                                std::span<const std::size_t> agents) {
    std::vector<std::vector<double>> pts;
    pts.reserve(agents.size());
    for (std::size_t i : agents) {
        const auto row = t.agent_at(record, i);
        pts.emplace_back(row.begin(), row.end());
    }
    return pts;
}

}  // namespace

ContainmentReport build_report(const TrajectoryRecord& trajectory, const NetworkTopology& topology,
                               const ControllerParams& params) {
    ContainmentReport rep;
    rep.status = run_status_name(trajectory.status);
    rep.complete = trajectory.status == RunStatus::Completed;
    rep.breach = trajectory.breach;

    const std::size_t records = trajectory.record_count();
    if (records == 0) {
        rep.note = "no recorded steps";
        return rep;
    }
    const std::size_t d = trajectory.dim;
    const std::size_t last = records - 1;

    double min_margin = std::numeric_limits<double>::infinity();
    for (double m : trajectory.min_margin) min_margin = std::min(min_margin, m);
    if (trajectory.breach) min_margin = std::min(min_margin, trajectory.breach->margin);
    rep.min_margin_over_run = min_margin;
    rep.connectivity_preserved = rep.complete && min_margin > 0.0;

    rep.min_offdiagonal = 0.0;
    for (double v : trajectory.min_offdiagonal) rep.min_offdiagonal = std::min(rep.min_offdiagonal, v);
    rep.max_row_sum_abs = 0.0;
    for (double v : trajectory.max_row_sum_abs) rep.max_row_sum_abs = std::max(rep.max_row_sum_abs, v);

    rep.spread_series.reserve(records);
    for (std::size_t r = 0; r < records; ++r) {
        StateSet snap = trajectory.snapshot(r);
        rep.spread_series.push_back(spread(snap));
    }

    std::vector<std::size_t> all_agents(trajectory.agent_count);
    std::iota(all_agents.begin(), all_agents.end(), 0);

    rep.hull_volume_series.reserve(records);
    if (d == 2) {
        std::vector<std::array<double, 2>> scratch;
        for (std::size_t r = 0; r < records; ++r) {
            rep.hull_volume_series.push_back(
                convex_area_2d(trajectory.states_at(r), trajectory.agent_count, scratch));
        }
    } else if (d == 1 || d == 3) {
        for (std::size_t r = 0; r < records; ++r) {
            rep.hull_volume_series.push_back(
                hull_volume(convex_hull(collect_points(trajectory, r, all_agents))));
        }
    } else {
        // Interval proxy: volume of the coordinate bounding box.
        for (std::size_t r = 0; r < records; ++r) {
            StateSet snap = trajectory.snapshot(r);
            double vol = 1.0;
            for (double s : spread(snap)) vol *= s;
            rep.hull_volume_series.push_back(vol);
        }
        rep.note = "dimension > 3: bounding-box volume and interval distances "
                   "replace exact hulls (necessary-condition proxy)";
    }

    if (d <= 3) {
        const auto leader_hull = convex_hull(collect_points(trajectory, last, topology.leader_ids));
        for (std::size_t f : trajectory.follower_ids) {
            rep.final_hull_distances.push_back(hull_distance(trajectory.agent_at(last, f), leader_hull));
        }
    } else {
        std::vector<double> lo(d, std::numeric_limits<double>::infinity());
        std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
        for (std::size_t l : topology.leader_ids) {
            const auto row = trajectory.agent_at(last, l);
            for (std::size_t c = 0; c < d; ++c) {
                lo[c] = std::min(lo[c], row[c]);
                hi[c] = std::max(hi[c], row[c]);
            }
        }
        for (std::size_t f : trajectory.follower_ids) {
            const auto row = trajectory.agent_at(last, f);
            double d2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double out = std::max({0.0, lo[c] - row[c], row[c] - hi[c]});
                d2 += out * out;
            }
            rep.final_hull_distances.push_back(std::sqrt(d2));
        }
    }

    StateSet final_snap = trajectory.snapshot(last);
    rep.equilibrium_residuals = equilibrium_residual(final_snap, topology, params);
    return rep;
}

}  // namespace focs
