#include "hypb/dynamics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace hypb {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_2pi(double a) {
    a = std::fmod(a, 2 * kPi);
    if (a < 0) a += 2 * kPi;
    return a;
}

// local arclength of a point known to lie on the piece
double local_param(const Piece& piece, Point2 p) {
    if (piece.is_arc()) {
        const ArcPiece& a = piece.arc();
        double phi = std::atan2(p.y - a.center.y, p.x - a.center.x);
        double off = a.sweep > 0 ? wrap_2pi(phi - a.start_angle) : wrap_2pi(a.start_angle - phi);
        if (off > std::abs(a.sweep)) {
            // fold overshoot from the wrap onto the nearest end
            double over = off - std::abs(a.sweep);
            double under = 2 * kPi - off;
            off = (over < under) ? std::abs(a.sweep) : 0.0;
        }
        return std::clamp(a.radius * off, 0.0, piece.length);
    }
    const SegmentPiece& s = piece.segment();
    return std::clamp((p - s.a).dot((s.b - s.a).normalized()), 0.0, piece.length);
}

bool hit_piece(const Piece& piece, const Ray& ray, double t_min, double best_t, Hit* out,
               int index) {
    bool found = false;
    if (piece.is_arc()) {
        for (const auto& h : ray_intersect_arc(ray, piece.arc(), t_min)) {
            if (h.t < best_t && (!found || h.t < out->t)) {
                *out = {h.t, h.point, index};
                found = true;
            }
        }
    } else {
        for (const auto& h : ray_intersect_segment(ray, piece.segment(), t_min)) {
            if (h.t < best_t && (!found || h.t < out->t)) {
                *out = {h.t, h.point, index};
                found = true;
            }
        }
    }
    return found;
}

}  // namespace

bool nearest_hit(const Table& table, const Ray& ray, double t_min, Hit* out) {
    Hit best;
    best.t = 1e300;
    bool found = false;
    if (!table.accel) {
        for (size_t i = 0; i < table.pieces.size(); ++i) {
            Hit h;
            if (hit_piece(table.pieces[i], ray, t_min, best.t, &h, static_cast<int>(i)) &&
                h.t < best.t) {
                best = h;
                found = true;
            }
        }
        if (found) *out = best;
        return found;
    }
    // grid walk (Amanatides-Woo) with early exit once the current cell begins
    // beyond the best hit
    const CollisionGrid& g = *table.accel;
    double ox = ray.origin.x, oy = ray.origin.y;
    double dx = ray.direction.x, dy = ray.direction.y;
    double t_enter = 0.0;
    double xmax = g.x0 + g.nx * g.cw, ymax = g.y0 + g.ny * g.ch;
    // clip to the grid box
    double t0 = 0.0, t1 = 1e300;
    auto clip = [&](double o, double d, double lo, double hi) {
        if (d == 0.0) return o >= lo && o <= hi;
        double ta = (lo - o) / d, tb = (hi - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        return t0 <= t1;
    };
    if (!clip(ox, dx, g.x0, xmax) || !clip(oy, dy, g.y0, ymax)) return false;
    t_enter = std::max(0.0, t0);
    double px = ox + t_enter * dx, py = oy + t_enter * dy;
    int ix = std::clamp(static_cast<int>((px - g.x0) / g.cw), 0, g.nx - 1);
    int iy = std::clamp(static_cast<int>((py - g.y0) / g.ch), 0, g.ny - 1);
    int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    double tMaxX = 1e300, tMaxY = 1e300, tDX = 1e300, tDY = 1e300;
    if (sx != 0) {
        double bx = g.x0 + (ix + (sx > 0 ? 1 : 0)) * g.cw;
        tMaxX = (bx - ox) / dx;
        tDX = g.cw / std::abs(dx);
    }
    if (sy != 0) {
        double by = g.y0 + (iy + (sy > 0 ? 1 : 0)) * g.ch;
        tMaxY = (by - oy) / dy;
        tDY = g.ch / std::abs(dy);
    }
    double cell_t = t_enter;
    int guard = 4 * (g.nx + g.ny) + 8;
    while (guard-- > 0) {
        for (int pi : g.cells[static_cast<size_t>(ix) * g.ny + iy]) {
            Hit h;
            if (hit_piece(table.pieces[pi], ray, t_min, best.t, &h, pi) && h.t < best.t) {
                best = h;
                found = true;
            }
        }
        if (found && best.t < std::min(tMaxX, tMaxY)) break;
        if (tMaxX < tMaxY) {
            cell_t = tMaxX;
            ix += sx;
            tMaxX += tDX;
            if (ix < 0 || ix >= g.nx) break;
        } else {
            cell_t = tMaxY;
            iy += sy;
            tMaxY += tDY;
            if (iy < 0 || iy >= g.ny) break;
        }
        if (cell_t > t1) break;
    }
    if (found) *out = best;
    return found;
}

Vec2 direction_of(const Table& table, const PhasePoint& x) {
    Vec2 t = table.tangent_at(x.bp);
    Vec2 n = t.perp();
    return std::cos(x.alpha) * n + std::sin(x.alpha) * t;
}

PhasePoint phase_from_hit(const Table& table, int piece, Point2 p, Vec2 outgoing) {
    PhasePoint x;
    x.bp.piece = piece;
    x.bp.u = local_param(table.pieces[piece], p);
    Vec2 t = table.tangent_at(x.bp);
    Vec2 n = t.perp();
    x.alpha = std::atan2(outgoing.dot(t), outgoing.dot(n));
    return x;
}

namespace {

struct StepState {
    Ray ray;
    double tau = 0.0;
};

// Closed-form traversal of a rectangular strip entered through its mouth
// gate. Exit is back through the gate; returns false on a singular corner
// configuration inside the strip.
struct StripTraversal {
    Point2 exit_point;
    Vec2 exit_dir;
    double tau = 0.0;
    long long wall_hits = 0;
};

bool traverse_strip(const StripInfo& si, Point2 entry, Vec2 dir, double corner_tol,
                    StripTraversal* out) {
    // strip frame: x along axis_u in [0, L], y along axis_n in [0, h]
    double y0 = (entry - si.corner).dot(si.axis_n);
    double dx = dir.dot(si.axis_u);
    double dy = dir.dot(si.axis_n);
    if (dx <= 0) return false;  // not entering
    double L = si.length, H = si.height;
    double y_end_unfolded = y0 + dy / dx * (2 * L);
    double y_at_wall = y0 + dy / dx * L;
    // corner proximity at the end wall and at the exit gate
    auto near_lattice = [&](double y) {
        double r = std::fmod(y, H);
        if (r < 0) r += H;
        return std::min(r, H - r) < corner_tol;
    };
    if (near_lattice(y_at_wall) || near_lattice(y_end_unfolded)) return false;
    // fold back into [0, H]
    double z = std::fmod(y_end_unfolded, 2 * H);
    if (z < 0) z += 2 * H;
    double y_exit = z <= H ? z : 2 * H - z;
    double dy_exit = z <= H ? dy : -dy;
    // count horizontal wall crossings of the unfolded path
    double a = std::min(y0, y_end_unfolded), b = std::max(y0, y_end_unfolded);
    long long k_lo = static_cast<long long>(std::ceil(a / H - 1e-15));
    long long k_hi = static_cast<long long>(std::floor(b / H + 1e-15));
    long long crossings = std::max<long long>(0, k_hi - k_lo + 1);
    out->exit_point = si.corner + y_exit * si.axis_n;
    out->exit_dir = -dx * si.axis_u + dy_exit * si.axis_n;
    out->tau = 2 * L / dx;
    out->wall_hits = crossings + 1;  // plus the end wall
    return true;
}

// crossing of the open gate segment [a, b] by the ray, strictly before t_cap
bool gate_crossing(Point2 a, Point2 b, const Ray& ray, double t_min, double t_cap,
                   double corner_tol, double* t_out, Point2* p_out, bool* near_corner) {
    Vec2 e = b - a;
    double denom = ray.direction.cross(e);
    if (denom == 0.0) return false;
    Vec2 w = a - ray.origin;
    double t = w.cross(e) / denom;
    double u = w.cross(ray.direction) / denom;
    if (t <= t_min || t >= t_cap || u < 0.0 || u > 1.0) return false;
    *t_out = t;
    *p_out = a + u * e;
    *near_corner = std::min(u, 1.0 - u) * e.norm() < corner_tol;
    return true;
}

}  // namespace

MapResult billiard_map(const Table& table, const PhasePoint& x, const DynOptions& opt) {
    Ray ray{table.point_at(x.bp), direction_of(table, x)};
    Hit hit;
    if (!nearest_hit(table, ray, opt.t_min, &hit))
        return SingularEvent{SingularEvent::corner_hit, ray.origin};  // escaped: corner leak
    const Piece& piece = table.pieces[hit.piece];
    double u = local_param(piece, hit.point);
    if (u < opt.corner_tol || piece.length - u < opt.corner_tol)
        return SingularEvent{SingularEvent::corner_hit, hit.point};
    Vec2 n = piece.inner_normal_at(u);
    double c_in = ray.direction.dot(n);
    if (std::abs(c_in) < opt.tangential_tol)
        return SingularEvent{SingularEvent::tangential_hit, hit.point};
    Vec2 out = ray.direction - 2.0 * c_in * n;
    return phase_from_hit(table, hit.piece, hit.point, out);
}

FlightResult first_return_map(const Table& table, const PhasePoint& x, const DynOptions& opt,
                              std::vector<CorridorVisit>* visits) {
    FlightRecord rec;
    rec.start = x;
    Ray ray{table.point_at(x.bp), direction_of(table, x)};

    // corridor trapezoid tracking state for traversal-order instrumentation
    int cur_spiral = -1;
    int cur_trap = 0;  // 0 = outside

    auto log_segment_gates = [&](Point2 p0, Point2 p1) {
        if (!visits || table.spirals.empty()) return;
        Vec2 d = p1 - p0;
        double len = d.norm();
        if (len == 0) return;
        Ray seg{p0, d * (1.0 / len)};
        double remaining = len;
        int guard = 1 << 20;
        while (guard-- > 0) {
            double best_t = remaining - 1e-12;
            int next_spiral = -1, next_trap = 0;
            bool found = false;
            auto try_gate = [&](int sidx, int gate_idx, int trap_if_forward,
                               int trap_if_backward) {
                const SpiralInfo& sp = table.spirals[sidx];
                Point2 a = sp.inner[gate_idx];
                Point2 b = sp.outer[gate_idx];
                double t;
                Point2 pp;
                bool corner;
                if (!gate_crossing(a, b, seg, 1e-12, best_t, 0.0, &t, &pp, &corner)) return;
                // crossing direction: sign of d . u_gate_normal decides
                Vec2 gate = b - a;
                double side = seg.direction.cross(gate);
                best_t = t;
                found = true;
                next_spiral = sidx;
                next_trap = side < 0 ? trap_if_forward : trap_if_backward;
            };
            if (cur_spiral < 0) {
                for (size_t sidx = 0; sidx < table.spirals.size(); ++sidx)
                    try_gate(static_cast<int>(sidx), 0, 1, 0);
            } else {
                const SpiralInfo& sp = table.spirals[cur_spiral];
                int n = sp.trapezoid_count();
                if (cur_trap < n) try_gate(cur_spiral, cur_trap, cur_trap + 1, cur_trap);
                try_gate(cur_spiral, cur_trap - 1, cur_trap, cur_trap - 1);
                (void)n;
            }
            if (!found) break;
            bool changed = (next_trap == 0) ? (cur_spiral >= 0)
                                            : (cur_spiral != next_spiral || cur_trap != next_trap);
            if (changed) {
                if (next_trap == 0) {
                    visits->push_back({cur_spiral, 0});
                    cur_spiral = -1;
                    cur_trap = 0;
                } else {
                    cur_spiral = next_spiral;
                    cur_trap = next_trap;
                    visits->push_back({cur_spiral, cur_trap});
                }
            }
            // continue past the crossing
            double advance = best_t + 1e-12;
            seg.origin = seg.origin + advance * seg.direction;
            remaining -= advance;
            if (remaining <= 0) break;
        }
    };

    long long flats = 0;
    int guard_iters = 0;
    while (true) {
        if (++guard_iters > (1 << 30)) return SingularEvent{SingularEvent::cap_exceeded, ray.origin};

        // strip fast path: does the ray cross a mouth gate before its next collision?
        Hit hit;
        bool have_hit = nearest_hit(table, ray, opt.t_min, &hit);
        if (opt.use_strip_fast_path && !table.strips.empty()) {
            double best_gate_t = have_hit ? hit.t : 1e300;
            int gate_strip = -1;
            double gt = 0;
            Point2 gp;
            bool gcorner = false;
            for (size_t si = 0; si < table.strips.size(); ++si) {
                const StripInfo& s = table.strips[si];
                Point2 a = s.corner;
                Point2 b = s.corner + s.height * s.axis_n;
                double t;
                Point2 p;
                bool corner;
                if (gate_crossing(a, b, ray, opt.t_min, best_gate_t, opt.corner_tol, &t, &p,
                                  &corner)) {
                    // only inbound crossings enter the strip
                    if (ray.direction.dot(s.axis_u) > 0) {
                        best_gate_t = t;
                        gate_strip = static_cast<int>(si);
                        gt = t;
                        gp = p;
                        gcorner = corner;
                    }
                }
            }
            if (gate_strip >= 0) {
                if (gcorner) return SingularEvent{SingularEvent::corner_hit, gp};
                const StripInfo& s = table.strips[gate_strip];
                StripTraversal tr;
                if (!traverse_strip(s, gp, ray.direction, opt.corner_tol, &tr))
                    return SingularEvent{SingularEvent::corner_hit, gp};
                if (std::abs(ray.direction.dot(s.axis_n)) < opt.tangential_tol) {
                    // grazing horizontally: walls are never struck transversally,
                    // but the end wall reflection is fine; keep going
                }
                rec.tau += gt + tr.tau;
                rec.n_flat_hits += tr.wall_hits;
                rec.entered_corridor = true;
                flats += tr.wall_hits;
                if (flats > opt.flat_cap) return SingularEvent{SingularEvent::cap_exceeded, gp};
                ray.origin = tr.exit_point;
                ray.direction = tr.exit_dir;
                continue;
            }
        }

        if (!have_hit) return SingularEvent{SingularEvent::corner_hit, ray.origin};
        const Piece& piece = table.pieces[hit.piece];
        double u = local_param(piece, hit.point);
        if (u < opt.corner_tol || piece.length - u < opt.corner_tol)
            return SingularEvent{SingularEvent::corner_hit, hit.point};
        Vec2 n = piece.inner_normal_at(u);
        double c_in = ray.direction.dot(n);
        if (std::abs(c_in) < opt.tangential_tol)
            return SingularEvent{SingularEvent::tangential_hit, hit.point};

        log_segment_gates(ray.origin, hit.point);

        Vec2 out_dir = ray.direction - 2.0 * c_in * n;
        // unit speed and equal angles of incidence and reflection
        assert(std::abs(out_dir.norm() - 1.0) < 1e-12);
        assert(std::abs(out_dir.dot(n) + c_in) < 1e-12);
        rec.tau += hit.t;
        if (piece.label == Label::flat) {
            rec.n_flat_hits++;
            rec.entered_corridor = true;
            if (static_cast<int>(rec.flat_sample.size()) < opt.flat_sample_cap)
                rec.flat_sample.push_back(
                    {hit.point, hit.piece, ray.direction, out_dir, hit.t});
            if (++flats > opt.flat_cap)
                return SingularEvent{SingularEvent::cap_exceeded, hit.point};
            ray.origin = hit.point;
            ray.direction = out_dir;
            continue;
        }
        rec.end = phase_from_hit(table, hit.piece, hit.point, out_dir);
        return rec;
    }
}

PhasePoint sample_mu(std::mt19937_64& rng, const Table& table, SampleDomain domain) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double total = 0;
    for (size_t i = 0; i < table.pieces.size(); ++i) {
        if (domain == SampleDomain::section && table.pieces[i].label == Label::flat) continue;
        total += table.pieces[i].length;
    }
    double s = uni(rng) * total;
    PhasePoint x;
    for (size_t i = 0; i < table.pieces.size(); ++i) {
        if (domain == SampleDomain::section && table.pieces[i].label == Label::flat) continue;
        if (s <= table.pieces[i].length) {
            x.bp = {static_cast<int>(i), s};
            break;
        }
        s -= table.pieces[i].length;
        x.bp = {static_cast<int>(i), table.pieces[i].length};
    }
    x.alpha = std::asin(2.0 * uni(rng) - 1.0);
    return x;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97f4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::mt19937_64 orbit_rng(std::uint64_t root_seed, std::uint64_t orbit_index) {
    std::uint64_t s = splitmix64(root_seed ^ splitmix64(orbit_index));
    return std::mt19937_64(s);
}

}  // namespace hypb
