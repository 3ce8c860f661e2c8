#include "finrank/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <utility>

namespace finrank {

namespace {

constexpr double kFinWidth = 100.0;   // base arc span in pixels
constexpr double kFinHeight = 42.0;   // base arc rise in pixels
constexpr Eigen::Index kRenderPoints = 600;

double splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL);
    s ^= s >> 33;
    s *= 0xff51afd7ed558ccdULL;
    s ^= s >> 33;
    return s;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

double gaussian(std::mt19937_64& rng) {
    // Box-Muller; kept local so draws are stable across standard libraries.
    double u1 = 0.0;
    do {
        u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double bump(double u) {  // raised cosine on [-1/2, 1/2]
    if (std::abs(u) >= 0.5) return 0.0;
    return 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * u));
}

// Base arc and its tangent at parameter t in [0, 1].
void base_arc(double t, double& x, double& y, double& tx, double& ty) {
    x = kFinWidth * t;
    y = kFinHeight * std::sin(std::numbers::pi * t);
    tx = kFinWidth;
    ty = kFinHeight * std::numbers::pi * std::cos(std::numbers::pi * t);
}

Eigen::Vector2d template_point(const IndividualTemplate& tpl, double t) {
    double x, y, tx, ty;
    base_arc(t, x, y, tx, ty);
    const double tl = std::hypot(tx, ty);
    const double nx = -ty / tl, ny = tx / tl;
    double offset = 0.0;
    for (const NotchSpec& notch : tpl.notches) {
        const double f = bump((t - notch.position) / notch.width);
        if (f > 0.0) offset += (notch.nick ? 1.0 : -1.0) * notch.depth * kFinHeight * f;
    }
    return {x + offset * nx, y + offset * ny};
}

// Cuts the given arc-length fractions from each end, interpolating the new
// endpoints exactly. Fractions of zero leave the polyline untouched.
PointList truncate_polyline(const PointList& pts, double head_frac, double tail_frac) {
    if (head_frac <= 0.0 && tail_frac <= 0.0) return pts;
    const Eigen::Index n = pts.rows();
    std::vector<double> cum(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 1; i < n; ++i)
        cum[static_cast<std::size_t>(i)] =
            cum[static_cast<std::size_t>(i - 1)] + (pts.row(i) - pts.row(i - 1)).norm();
    const double total = cum.back();
    const double s0 = head_frac * total;
    const double s1 = (1.0 - tail_frac) * total;

    auto locate = [&](double s, Eigen::Index hint) {
        Eigen::Index seg = hint;
        while (seg + 2 < n && cum[static_cast<std::size_t>(seg + 1)] < s) ++seg;
        const double a = cum[static_cast<std::size_t>(seg)];
        const double b = cum[static_cast<std::size_t>(seg + 1)];
        const double t = b > a ? (s - a) / (b - a) : 0.0;
        return std::pair<Eigen::Index, Eigen::Vector2d>(
            seg, pts.row(seg).transpose() + t * (pts.row(seg + 1) - pts.row(seg)).transpose());
    };

    const auto [seg0, p0] = locate(s0, 0);
    const auto [seg1, p1] = locate(s1, seg0);

    std::vector<Eigen::Vector2d> kept;
    kept.push_back(p0);
    for (Eigen::Index i = seg0 + 1; i <= seg1; ++i) {
        Eigen::Vector2d p = pts.row(i).transpose();
        if ((p - kept.back()).norm() > 0.0) kept.push_back(p);
    }
    if ((p1 - kept.back()).norm() > 0.0) kept.push_back(p1);

    PointList out(static_cast<Eigen::Index>(kept.size()), 2);
    for (std::size_t i = 0; i < kept.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = kept[i];
    return out;
}

}  // namespace

Contour sample_template(const IndividualTemplate& tpl, Eigen::Index n) {
    if (n < 2) throw DomainError("template sample count must be at least 2");
    Contour c;
    c.individual_id = tpl.id;
    c.points.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        c.points.row(i) = template_point(tpl, t).transpose();
    }
    return c;
}

std::vector<IndividualTemplate> generate_population(int n_individuals, int notches_per_individual,
                                                    std::uint64_t seed, double pos_lo,
                                                    double pos_hi) {
    if (n_individuals < 1) throw DomainError("population size must be positive");
    if (notches_per_individual < 1) throw DomainError("notch count must be positive");
    if (!(0.0 < pos_lo && pos_lo < pos_hi && pos_hi < 1.0))
        throw DomainError("notch placement interval must sit inside (0, 1)");

    const double kPosLo = pos_lo, kPosHi = pos_hi;
    constexpr double kMinSeparation = 0.025;  // between sorted position vectors, L-inf
    std::mt19937_64 rng(seed);

    std::vector<IndividualTemplate> population;
    std::vector<std::vector<double>> sorted_positions;

    for (int ind = 0; ind < n_individuals; ++ind) {
        bool placed = false;
        for (int attempt = 0; attempt < 4000 && !placed; ++attempt) {
            std::vector<NotchSpec> notches;
            bool ok = true;
            for (int j = 0; j < notches_per_individual && ok; ++j) {
                NotchSpec spec;
                spec.position = uniform(rng, kPosLo, kPosHi);
                spec.width = uniform(rng, 0.035, 0.07);
                spec.depth = uniform(rng, 0.06, 0.16);
                spec.nick = (rng() & 1) != 0;
                for (const NotchSpec& other : notches) {
                    const double widest = std::max(spec.width, other.width);
                    if (std::abs(spec.position - other.position) < widest) {
                        ok = false;
                        break;
                    }
                }
                if (ok) notches.push_back(spec);
            }
            if (!ok) continue;

            std::vector<double> pos;
            for (const auto& s : notches) pos.push_back(s.position);
            std::sort(pos.begin(), pos.end());
            bool distinct = true;
            for (const auto& prev : sorted_positions) {
                double linf = 0.0;
                for (std::size_t t = 0; t < pos.size(); ++t)
                    linf = std::max(linf, std::abs(pos[t] - prev[t]));
                if (linf < kMinSeparation) {
                    distinct = false;
                    break;
                }
            }
            if (!distinct) continue;

            IndividualTemplate tpl;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "ind%03d", ind);
            tpl.id = buf;
            tpl.notches = std::move(notches);
            population.push_back(std::move(tpl));
            sorted_positions.push_back(std::move(pos));
            placed = true;
        }
        if (!placed)
            throw Error("could not place " + std::to_string(notches_per_individual) +
                        " non-overlapping notches for individual " + std::to_string(ind));
    }
    return population;
}

std::vector<Contour> render_encounter(const IndividualTemplate& tpl, const DistortionConfig& d,
                                      int images, std::uint64_t seed,
                                      const std::string& encounter_id) {
    if (images < 1) throw DomainError("image count must be positive");
    if (d.truncation < 0.0 || d.truncation >= 0.3)
        throw DomainError("truncation fraction must be in [0, 0.3)");

    std::mt19937_64 rng(seed);
    const Contour base = sample_template(tpl, kRenderPoints);

    std::vector<Contour> out;
    out.reserve(static_cast<std::size_t>(images));
    for (int img = 0; img < images; ++img) {
        const double theta = uniform(rng, -d.rotation_deg, d.rotation_deg) *
                             std::numbers::pi / 180.0;
        const double sx = uniform(rng, 1.0 - d.aniso_scale, 1.0 + d.aniso_scale);
        const double sy = uniform(rng, 1.0 - d.aniso_scale, 1.0 + d.aniso_scale);
        const double split = uniform(rng, 0.0, 1.0);
        const double head = d.truncation * split;
        const double tail = d.truncation - head;

        PointList pts = base.points;
        for (int b = 0; b < d.end_noise_bumps; ++b) {
            const bool head = (rng() & 1) != 0;
            const double t_c = head ? uniform(rng, 0.03, 0.15) : uniform(rng, 0.85, 0.97);
            const double width = uniform(rng, 0.05, 0.09);
            // outward only, so the bumps stay identity-free without touching
            // the bounding box that sets the curvature radii
            const double depth = d.end_noise_depth * kFinHeight * uniform(rng, 0.4, 1.0);
            for (Eigen::Index i = 0; i < pts.rows(); ++i) {
                const double t = static_cast<double>(i) / static_cast<double>(pts.rows() - 1);
                const double f = bump((t - t_c) / width);
                if (f <= 0.0) continue;
                const Eigen::Index lo = std::max<Eigen::Index>(i - 1, 0);
                const Eigen::Index hi = std::min<Eigen::Index>(i + 1, pts.rows() - 1);
                Eigen::Vector2d tan = (pts.row(hi) - pts.row(lo)).transpose();
                const double len = tan.norm();
                if (len <= 0.0) continue;
                pts(i, 0) += depth * f * (-tan.y() / len);
                pts(i, 1) += depth * f * (tan.x() / len);
            }
        }
        const Eigen::RowVector2d center = pts.colwise().mean();
        if (theta != 0.0) {
            const double cs = std::cos(theta), sn = std::sin(theta);
            for (Eigen::Index i = 0; i < pts.rows(); ++i) {
                const double px = pts(i, 0) - center.x(), py = pts(i, 1) - center.y();
                pts(i, 0) = center.x() + cs * px - sn * py;
                pts(i, 1) = center.y() + sn * px + cs * py;
            }
        }
        if (sx != 1.0 || sy != 1.0) {
            for (Eigen::Index i = 0; i < pts.rows(); ++i) {
                pts(i, 0) = center.x() + sx * (pts(i, 0) - center.x());
                pts(i, 1) = center.y() + sy * (pts(i, 1) - center.y());
            }
        }
        pts = truncate_polyline(pts, head, tail);
        if (d.jitter_sigma > 0.0) {
            for (Eigen::Index i = 0; i < pts.rows(); ++i) {
                pts(i, 0) += d.jitter_sigma * gaussian(rng);
                pts(i, 1) += d.jitter_sigma * gaussian(rng);
            }
        }

        Contour c;
        c.points = std::move(pts);
        c.individual_id = tpl.id;
        c.encounter_id = encounter_id;
        c.image_id = "i" + std::to_string(img);
        out.push_back(std::move(c));
    }
    return out;
}

EncounterDatabase generate_benchmark(const BenchmarkConfig& cfg) {
    const auto population =
        generate_population(cfg.individuals, cfg.notches, cfg.seed, cfg.notch_lo, cfg.notch_hi);
    EncounterDatabase db;
    for (std::size_t ind = 0; ind < population.size(); ++ind) {
        for (int enc = 0; enc < cfg.encounters; ++enc) {
            DistortionConfig d = cfg.distortion;
            const std::uint64_t enc_seed = mix_seed(cfg.seed, ind + 1, static_cast<std::uint64_t>(enc) + 1);
            if (cfg.per_encounter_occlusion > 0.0) {
                std::uint64_t state = enc_seed;
                d.truncation = splitmix64(state) * cfg.per_encounter_occlusion;
            }
            const std::string enc_id = "e" + std::to_string(enc);
            for (Contour& c : render_encounter(population[ind], d, cfg.images, enc_seed, enc_id))
                db.insert(std::move(c));
        }
    }
    return db;
}

}  // namespace finrank
