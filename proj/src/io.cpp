#include "hypb/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hypb::io {

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// SHA-1 (FIPS 180-1), enough for content addressing of small text artifacts
namespace {

struct Sha1 {
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    std::uint64_t total = 0;
    unsigned char block[64];
    size_t fill = 0;

    static std::uint32_t rol(std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

    void process(const unsigned char* p) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            std::uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = t;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }

    void update(const unsigned char* p, size_t n) {
        total += n;
        while (n > 0) {
            size_t take = std::min(n, sizeof(block) - fill);
            std::memcpy(block + fill, p, take);
            fill += take;
            p += take;
            n -= take;
            if (fill == 64) {
                process(block);
                fill = 0;
            }
        }
    }

    std::string hex() {
        std::uint64_t bits = total * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (fill != 56) update(&zero, 1);
        unsigned char len[8];
        for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
        update(len, 8);
        char out[41];
        for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
        return std::string(out, 40);
    }
};

}  // namespace

std::string sha1_hex(std::string_view data) {
    Sha1 s;
    s.update(reinterpret_cast<const unsigned char*>(data.data()), data.size());
    return s.hex();
}

std::string git_blob_hash(std::string_view content) {
    std::string header = "blob " + std::to_string(content.size());
    header.push_back('\0');
    Sha1 s;
    s.update(reinterpret_cast<const unsigned char*>(header.data()), header.size());
    s.update(reinterpret_cast<const unsigned char*>(content.data()), content.size());
    return s.hex();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp);
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename into " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<double> quantiles(std::vector<double> v, const std::vector<double>& qs) {
    std::vector<double> out;
    if (v.empty()) return std::vector<double>(qs.size(), 0.0);
    std::sort(v.begin(), v.end());
    for (double q : qs) {
        double idx = q * (v.size() - 1);
        size_t lo = static_cast<size_t>(idx);
        size_t hi = std::min(lo + 1, v.size() - 1);
        double w = idx - lo;
        out.push_back(v[lo] * (1 - w) + v[hi] * w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON writers (hand-rolled: fixed key order, 17-digit reals)
namespace {

struct JsonOut {
    std::ostringstream ss;
    void raw(const std::string& s) { ss << s; }
    void key(const std::string& k) { ss << '"' << k << "\":"; }
    void num(double v) { ss << fmt_g17(v); }
    void str(const std::string& s) { ss << '"' << s << '"'; }
};

}  // namespace

std::string table_to_json(const Table& t) {
    JsonOut j;
    j.raw("{");
    j.key("family");
    j.str(t.family);
    j.raw(",");
    j.key("k_f");
    j.num(t.k_f);
    j.raw(",");
    j.key("k_d");
    j.num(t.k_d);
    j.raw(",");
    j.key("perimeter");
    j.num(t.perimeter);
    j.raw(",");
    j.key("pieces");
    j.raw("[");
    for (size_t i = 0; i < t.pieces.size(); ++i) {
        const Piece& p = t.pieces[i];
        if (i) j.raw(",");
        j.raw("{");
        j.key("label");
        j.str(label_name(p.label));
        j.raw(",");
        if (p.is_arc()) {
            const ArcPiece& a = p.arc();
            j.key("type");
            j.str("arc");
            j.raw(",");
            j.key("center");
            j.raw("[" + fmt_g17(a.center.x) + "," + fmt_g17(a.center.y) + "],");
            j.key("radius");
            j.num(a.radius);
            j.raw(",");
            j.key("start_angle");
            j.num(a.start_angle);
            j.raw(",");
            j.key("sweep");
            j.num(a.sweep);
        } else {
            const SegmentPiece& s = p.segment();
            j.key("type");
            j.str("segment");
            j.raw(",");
            j.key("a");
            j.raw("[" + fmt_g17(s.a.x) + "," + fmt_g17(s.a.y) + "],");
            j.key("b");
            j.raw("[" + fmt_g17(s.b.x) + "," + fmt_g17(s.b.y) + "]");
        }
        j.raw("}");
    }
    j.raw("]}");
    return j.ss.str();
}

std::string certificate_to_json(const GeometryCertificate& cert, const Table& t,
                                const SpiralParams* spiral, double h_o,
                                const std::string& config_hash,
                                const std::string& table_hash) {
    JsonOut j;
    j.raw("{");
    j.key("config_hash");
    j.str(config_hash);
    j.raw(",");
    j.key("table_hash");
    j.str(table_hash);
    j.raw(",");
    j.key("family");
    j.str(t.family);
    j.raw(",");
    j.key("c1_ok");
    j.raw(cert.c1.ok ? "true" : "false");
    j.raw(",");
    j.key("c1_margin");
    j.num(cert.c1.margin);
    j.raw(",");
    j.key("c1_witness");
    j.raw("{\"s_dispersing\":" + fmt_g17(cert.c1.witness_sd) +
          ",\"s_focusing\":" + fmt_g17(cert.c1.witness_sf) + "},");
    j.key("c1_near_critical_pairs");
    j.raw(std::to_string(cert.c1.near_critical_pairs));
    j.raw(",");
    j.key("c1_eps_grid");
    j.num(cert.c1.eps_grid);
    j.raw(",");
    j.key("c2_ok");
    j.raw(cert.c2_ok ? "true" : "false");
    j.raw(",");
    j.key("c2_margin");
    j.num(cert.c2_margin);
    j.raw(",");
    j.key("h");
    j.num(cert.h);
    j.raw(",");
    j.key("l");
    j.num(cert.l);
    j.raw(",");
    j.key("h_o");
    j.num(h_o);
    j.raw(",");
    j.key("area");
    j.num(cert.area);
    j.raw(",");
    j.key("diameter");
    j.num(cert.diameter);
    if (spiral) {
        j.raw(",");
        j.key("spiral");
        j.raw("{");
        j.key("r0");
        j.num(spiral->r0);
        j.raw(",");
        j.key("n_bar");
        j.raw(std::to_string(spiral->n_bar));
        j.raw(",");
        j.key("rounds");
        j.raw(std::to_string(spiral->rounds));
        j.raw(",");
        j.key("m_right");
        j.raw(std::to_string(spiral->m_right));
        j.raw(",");
        j.key("m_left");
        j.raw(std::to_string(spiral->m_left));
        j.raw(",");
        j.key("w0");
        j.num(spiral->w0);
        j.raw(",");
        j.key("k4");
        j.num(spiral->k4);
        j.raw(",");
        j.key("gap_fraction");
        j.num(spiral->gap_fraction);
        j.raw(",");
        j.key("h_bracket_margin");
        j.num(std::min(cert.h - h_o, 2 * h_o - cert.h));
        j.raw(",");
        j.key("spiral_ok");
        j.raw(cert.spiral_ok ? "true" : "false");
        j.raw(",");
        j.key("k1_measured");
        j.num(cert.k1_measured);
        j.raw(",");
        j.key("k2_measured");
        j.num(cert.k2_measured);
        j.raw(",");
        j.key("k3_measured");
        j.num(cert.k3_measured);
        j.raw(",");
        j.key("sum_l_right");
        j.num(cert.sum_l_right);
        j.raw(",");
        j.key("sum_l_left");
        j.num(cert.sum_l_left);
        j.raw("}");
    }
    j.raw("}");
    return j.ss.str();
}

namespace {

std::string case_histogram_json(const std::array<long long, kCaseCount>& counts) {
    std::string s = "{";
    for (int t = 0; t < kCaseCount; ++t) {
        if (t) s += ",";
        s += "\"" + std::string(case_name(static_cast<CaseTag>(t))) +
             "\":" + std::to_string(counts[t]);
    }
    return s + "}";
}

std::string quantile_json(const std::vector<double>& values) {
    const std::vector<double> qs{0.0, 0.01, 0.1, 0.5, 0.9, 1.0};
    auto v = quantiles(values, qs);
    std::string s = "{";
    const char* names[] = {"min", "p01", "p10", "p50", "p90", "max"};
    for (size_t i = 0; i < qs.size(); ++i) {
        if (i) s += ",";
        s += "\"" + std::string(names[i]) + "\":" + fmt_g17(v[i]);
    }
    return s + "}";
}

}  // namespace

std::string cone_report_to_json(const ConeSurveyReport& rep, const std::string& table_hash,
                                const std::string& config_hash) {
    JsonOut j;
    j.raw("{");
    j.key("table_hash");
    j.str(table_hash);
    j.raw(",");
    j.key("config_hash");
    j.str(config_hash);
    j.raw(",");
    j.key("seed");
    j.raw(std::to_string(rep.seed));
    j.raw(",");
    j.key("N");
    j.raw(std::to_string(rep.n_orbits));
    j.raw(",");
    j.key("n");
    j.raw(std::to_string(rep.n_steps));
    j.raw(",");
    j.key("completed");
    j.raw(std::to_string(rep.completed));
    j.raw(",");
    j.key("total_draws");
    j.raw(std::to_string(rep.total_draws));
    j.raw(",");
    j.key("violations_total");
    j.raw(std::to_string(rep.violations_total));
    j.raw(",");
    j.key("violations");
    j.raw("[");
    for (size_t i = 0; i < rep.violations.size(); ++i) {
        const Violation& v = rep.violations[i];
        if (i) j.raw(",");
        j.raw("{\"orbit_id\":" + std::to_string(v.orbit_id) +
              ",\"step\":" + std::to_string(v.step) + ",\"case\":\"" + case_name(v.tag) +
              "\",\"margin\":" + fmt_g17(v.margin) + ",\"s0\":" + fmt_g17(v.s0) +
              ",\"alpha0\":" + fmt_g17(v.alpha0) + "}");
    }
    j.raw("],");
    j.key("case_histogram");
    j.raw(case_histogram_json(rep.case_counts));
    j.raw(",");
    j.key("nonstrict_histogram");
    j.raw(case_histogram_json(rep.nonstrict_counts));
    j.raw(",");
    j.key("case_min_margin");
    {
        std::string s = "{";
        for (int t = 0; t < kCaseCount; ++t) {
            if (t) s += ",";
            double m = rep.case_counts[t] ? rep.case_min_margin[t] : 0.0;
            s += "\"" + std::string(case_name(static_cast<CaseTag>(t))) + "\":" + fmt_g17(m);
        }
        j.raw(s + "},");
    }
    j.key("min_margin");
    j.num(rep.min_margin);
    j.raw(",");
    j.key("margin_quantiles");
    j.raw(quantile_json(rep.per_orbit_min_margin));
    j.raw(",");
    j.key("n_of_x_quantiles");
    {
        std::vector<double> nx;
        for (int v : rep.per_orbit_first_strict)
            if (v > 0) nx.push_back(v);
        j.raw(quantile_json(nx));
    }
    j.raw(",");
    j.key("orbits_without_strict");
    j.raw(std::to_string(rep.orbits_without_strict));
    j.raw(",");
    j.key("infinity_touches");
    j.raw(std::to_string(rep.infinity_touches));
    j.raw(",");
    j.key("max_consecutive_iv21");
    j.raw(std::to_string(rep.max_iv21_run));
    j.raw(",");
    j.key("singular_counts");
    j.raw("{\"corner\":" + std::to_string(rep.singular_corner) +
          ",\"tangential\":" + std::to_string(rep.singular_tangential) +
          ",\"cap\":" + std::to_string(rep.singular_cap) + "}");
    j.raw("}");
    return j.ss.str();
}

std::string lyapunov_report_to_json(const LyapunovSurveyReport& rep,
                                    const std::string& table_hash,
                                    const std::string& config_hash) {
    JsonOut j;
    j.raw("{");
    j.key("table_hash");
    j.str(table_hash);
    j.raw(",");
    j.key("config_hash");
    j.str(config_hash);
    j.raw(",");
    j.key("seed");
    j.raw(std::to_string(rep.seed));
    j.raw(",");
    j.key("N");
    j.raw(std::to_string(rep.n_orbits));
    j.raw(",");
    j.key("n");
    j.raw(std::to_string(rep.n_steps));
    j.raw(",");
    j.key("reversed");
    j.raw(rep.reversed ? "true" : "false");
    j.raw(",");
    j.key("completed");
    j.raw(std::to_string(rep.completed));
    j.raw(",");
    j.key("excluded_short");
    j.raw(std::to_string(rep.excluded_short));
    j.raw(",");
    j.key("lambda_mean");
    j.num(rep.lambda_mean);
    j.raw(",");
    j.key("lambda_half_mean");
    j.num(rep.lambda_half_mean);
    j.raw(",");
    j.key("stderr_stat");
    j.num(rep.stderr_stat);
    j.raw(",");
    j.key("convergence_gap");
    j.num(rep.convergence_gap);
    j.raw(",");
    j.key("stderr_total");
    j.num(rep.stderr_total);
    j.raw(",");
    j.key("cone_violations");
    j.raw(std::to_string(rep.cone_violations));
    j.raw("}");
    return j.ss.str();
}

std::string lyapunov_rows_csv(const LyapunovSurveyReport& rep, const std::string& table_hash,
                              const std::string& config_hash) {
    std::ostringstream ss;
    ss << "# table_hash=" << table_hash << " config_hash=" << config_hash << "\n";
    ss << "seed,s0,alpha0,n_effective,lambda_hat\n";
    for (const auto& r : rep.rows)
        ss << r.orbit_seed << "," << fmt_g17(r.s0) << "," << fmt_g17(r.alpha0) << "," << r.n_eff
           << "," << fmt_g17(r.lambda) << "\n";
    return ss.str();
}

// ---------------------------------------------------------------------------
// SVG
namespace {

struct Extent {
    double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
    void add(Point2 p) {
        xmin = std::min(xmin, p.x);
        ymin = std::min(ymin, p.y);
        xmax = std::max(xmax, p.x);
        ymax = std::max(ymax, p.y);
    }
};

const char* label_color(Label l) {
    switch (l) {
        case Label::focusing: return "#c2382f";
        case Label::dispersing: return "#2f5fc2";
        case Label::flat: return "#777777";
    }
    return "#000";
}

std::string svg_header(const Extent& e, double pad) {
    double w = e.xmax - e.xmin + 2 * pad, h = e.ymax - e.ymin + 2 * pad;
    std::ostringstream ss;
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt_g17(e.xmin - pad) << " "
       << fmt_g17(-(e.ymax + pad)) << " " << fmt_g17(w) << " " << fmt_g17(h)
       << "\" width=\"900\" height=\"" << fmt_g17(900 * h / w) << "\">\n";
    // y axis flipped so the table appears in standard orientation
    ss << "<g transform=\"scale(1,-1)\">\n";
    return ss.str();
}

std::string piece_path(const Piece& p) {
    std::ostringstream ss;
    Point2 a = p.start(), b = p.end();
    ss << "M " << fmt_g17(a.x) << " " << fmt_g17(a.y) << " ";
    if (p.is_arc()) {
        const ArcPiece& arc = p.arc();
        int large = std::abs(arc.sweep) > 3.14159265358979323846 ? 1 : 0;
        int sweep_flag = arc.sweep > 0 ? 1 : 0;
        ss << "A " << fmt_g17(arc.radius) << " " << fmt_g17(arc.radius) << " 0 " << large << " "
           << sweep_flag << " " << fmt_g17(b.x) << " " << fmt_g17(b.y);
    } else {
        ss << "L " << fmt_g17(b.x) << " " << fmt_g17(b.y);
    }
    return ss.str();
}

Extent table_extent(const Table& t) {
    Extent e;
    for (const auto& p : t.pieces) {
        e.add(p.start());
        if (p.is_arc())
            for (int i = 1; i < 16; ++i) e.add(p.arc().point_at(p.length * i / 16));
    }
    return e;
}

}  // namespace

std::string table_to_svg(const Table& t) {
    Extent e = table_extent(t);
    double pad = 0.05 * std::max(e.xmax - e.xmin, e.ymax - e.ymin);
    std::ostringstream ss;
    ss << svg_header(e, pad);
    double stroke = 0.002 * std::max(e.xmax - e.xmin, e.ymax - e.ymin);
    for (const auto& p : t.pieces)
        ss << "<path d=\"" << piece_path(p) << "\" fill=\"none\" stroke=\""
           << label_color(p.label) << "\" stroke-width=\"" << fmt_g17(stroke) << "\"/>\n";
    ss << "</g>\n</svg>\n";
    return ss.str();
}

std::string trajectory_svg(const Table& t, const std::vector<Point2>& pts) {
    Extent e = table_extent(t);
    for (const auto& p : pts) e.add(p);
    double pad = 0.05 * std::max(e.xmax - e.xmin, e.ymax - e.ymin);
    std::ostringstream ss;
    ss << svg_header(e, pad);
    double stroke = 0.002 * std::max(e.xmax - e.xmin, e.ymax - e.ymin);
    for (const auto& p : t.pieces)
        ss << "<path d=\"" << piece_path(p) << "\" fill=\"none\" stroke=\""
           << label_color(p.label) << "\" stroke-width=\"" << fmt_g17(stroke) << "\"/>\n";
    ss << "<polyline fill=\"none\" stroke=\"#222\" stroke-width=\"" << fmt_g17(stroke * 0.7)
       << "\" points=\"";
    for (const auto& p : pts) ss << fmt_g17(p.x) << "," << fmt_g17(p.y) << " ";
    ss << "\"/>\n</g>\n</svg>\n";
    return ss.str();
}

std::string study_csv(const std::vector<StudyRow>& rows, const std::string& config_hash) {
    std::ostringstream ss;
    ss << "# config_hash=" << config_hash << "\n";
    ss << "k_f,h_o,h_o_over_k_f,area_optimal,diameter_optimal,area_spiral,diameter_spiral,"
          "K_1,K_2,K_3,N_bar,M\n";
    for (const auto& r : rows)
        ss << fmt_g17(r.k_f) << "," << fmt_g17(r.h_o) << "," << fmt_g17(r.h_o / r.k_f) << ","
           << fmt_g17(r.area_opt) << "," << fmt_g17(r.diam_opt) << "," << fmt_g17(r.area_spiral)
           << "," << fmt_g17(r.diam_spiral) << "," << fmt_g17(r.k1) << "," << fmt_g17(r.k2)
           << "," << fmt_g17(r.k3) << "," << r.n_bar << "," << r.rounds << "\n";
    return ss.str();
}

std::string study_plots_svg(const std::vector<StudyRow>& rows) {
    // log-log display of the scaling columns
    std::ostringstream ss;
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 480\" width=\"640\" "
          "height=\"480\">\n";
    ss << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    auto x_of = [&](double kf) {
        return 60 + (std::log10(kf) + 3.0) / 2.0 * 520;  // k_f in [1e-3, 1e-1]
    };
    auto y_of = [&](double v, double vmin, double vmax) {
        double lv = std::log10(std::max(v, 1e-12));
        double l0 = std::log10(std::max(vmin, 1e-12)), l1 = std::log10(std::max(vmax, 1e-12));
        if (l1 <= l0) l1 = l0 + 1;
        return 440 - (lv - l0) / (l1 - l0) * 400;
    };
    struct Series {
        const char* name;
        const char* color;
        std::vector<double> vals;
    };
    std::vector<Series> series{{"h_o/k_f", "#c2382f", {}},
                               {"area_optimal", "#2f5fc2", {}},
                               {"diameter_optimal", "#2fa05a", {}},
                               {"diameter_spiral", "#a02fa0", {}}};
    for (const auto& r : rows) {
        series[0].vals.push_back(r.h_o / r.k_f);
        series[1].vals.push_back(r.area_opt);
        series[2].vals.push_back(r.diam_opt);
        series[3].vals.push_back(r.diam_spiral);
    }
    double vmin = 1e300, vmax = -1e300;
    for (const auto& s : series)
        for (double v : s.vals) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    int li = 0;
    for (const auto& s : series) {
        ss << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (size_t i = 0; i < rows.size(); ++i)
            ss << fmt_g17(x_of(rows[i].k_f)) << "," << fmt_g17(y_of(s.vals[i], vmin, vmax))
               << " ";
        ss << "\"/>\n";
        ss << "<text x=\"70\" y=\"" << 20 + 16 * li << "\" fill=\"" << s.color
           << "\" font-size=\"13\">" << s.name << "</text>\n";
        ++li;
    }
    ss << "<text x=\"280\" y=\"470\" font-size=\"13\">k_f (log)</text>\n";
    ss << "</svg>\n";
    return ss.str();
}

}  // namespace hypb::io
