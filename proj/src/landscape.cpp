#include "dacer/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "dacer/errors.hpp"
#include "dacer/tensor.hpp"

namespace dacer {

namespace {

constexpr int kMinResolution = 50;
constexpr int kImagePx = 700;

std::ofstream open_out(const std::string& path, const char* what) {
    std::ofstream f(path);
    if (!f) throw ContractError(std::string(what) + ": cannot open '" + path + "' for writing");
    f.precision(17);
    return f;
}

// Plane coordinates -> image pixel (y axis up).
cv::Point2d to_px(double x, double y, double hw) {
    double u = (x + hw) / (2.0 * hw) * kImagePx;
    double v = kImagePx - (y + hw) / (2.0 * hw) * kImagePx;
    return {u, v};
}

const std::array<cv::Scalar, 6> kFanColors = {{
    {180, 119, 31},  // blue
    {14, 127, 255},  // orange
    {44, 160, 44},   // green
    {40, 39, 214},   // red
    {189, 103, 148}, // purple
    {207, 190, 23},  // teal
}};

} // namespace

LandscapeGrid compute_landscape(int resolution, double half_width, const ActionField& action,
                                const ValueField& value) {
    if (resolution < kMinResolution)
        throw ContractError("landscape: resolution must be at least " +
                            std::to_string(kMinResolution));
    if (!(half_width > 0))
        throw ContractError("landscape: half_width must be positive");

    LandscapeGrid g;
    g.resolution = resolution;
    g.half_width = half_width;
    g.xs.resize(resolution);
    g.ys.resize(resolution);
    const double step = 2.0 * half_width / (resolution - 1);
    for (int i = 0; i < resolution; ++i) {
        g.xs[i] = -half_width + i * step;
        g.ys[i] = -half_width + i * step;
    }
    const size_t total = static_cast<size_t>(resolution) * resolution;
    g.q.resize(total);
    g.ax.resize(total);
    g.ay.resize(total);
    for (int iy = 0; iy < resolution; ++iy) {
        for (int ix = 0; ix < resolution; ++ix) {
            const double x = g.xs[ix];
            const double y = g.ys[iy];
            const std::array<double, 2> a = action(x, y);
            const double v = value(x, y, a[0], a[1]);
            if (!std::isfinite(a[0]) || !std::isfinite(a[1]) || !std::isfinite(v))
                throw NumericFault("landscape: non-finite field at (" + std::to_string(x) +
                                   ", " + std::to_string(y) + ")");
            const size_t idx = static_cast<size_t>(iy) * resolution + ix;
            g.ax[idx] = a[0];
            g.ay[idx] = a[1];
            g.q[idx] = v;
        }
    }
    return g;
}

LandscapeGrid compute_q_landscape(const DiffusionPolicy& policy, const CriticPair& critics,
                                  int resolution, double half_width, Rng& rng) {
    if (policy.state_dim() != 2 || policy.action_dim() != 2)
        throw ContractError("landscape: needs a planar policy (2-D states and actions)");
    if (critics.state_dim() != 2 || critics.action_dim() != 2)
        throw ContractError("landscape: needs planar critics");

    ActionField action = [&policy, &rng](double x, double y) {
        std::vector<double> a = policy.act({x, y}, rng);
        return std::array<double, 2> {a[0], a[1]};
    };
    ValueField value = [&critics](double x, double y, double axv, double ayv) {
        NoGrad off_tape;
        Tensor s({1, 2}, {x, y});
        Tensor a({1, 2}, {axv, ayv});
        return std::min(critics.q1(s, a).at(0), critics.q2(s, a).at(0));
    };
    return compute_landscape(resolution, half_width, action, value);
}

std::vector<Peak> detect_peaks(const LandscapeGrid& g) {
    std::vector<Peak> peaks;
    const int res = g.resolution;
    for (int iy = 1; iy + 1 < res; ++iy) {
        for (int ix = 1; ix + 1 < res; ++ix) {
            const double v = g.q_at(ix, iy);
            bool is_peak = true;
            for (int dy = -1; dy <= 1 && is_peak; ++dy)
                for (int dx = -1; dx <= 1 && is_peak; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (v <= g.q_at(ix + dx, iy + dy)) is_peak = false;
                }
            if (is_peak) peaks.push_back({g.xs[ix], g.ys[iy], v});
        }
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.q > b.q; });
    return peaks;
}

std::vector<Peak> cluster_peaks(const std::vector<Peak>& peaks, double radius) {
    if (radius < 0) throw ContractError("cluster_peaks: radius must be non-negative");
    const size_t n = peaks.size();
    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), size_t {0});
    std::function<size_t(size_t)> find = [&](size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            if (std::hypot(peaks[i].x - peaks[j].x, peaks[i].y - peaks[j].y) <= radius)
                parent[find(i)] = find(j);
        }
    std::vector<Peak> out;
    for (size_t i = 0; i < n; ++i) {
        if (find(i) != i) continue;
        Peak best = peaks[i];
        for (size_t j = 0; j < n; ++j)
            if (find(j) == find(i) && peaks[j].q > best.q) best = peaks[j];
        out.push_back(best);
    }
    std::sort(out.begin(), out.end(), [](const Peak& a, const Peak& b) { return a.q > b.q; });
    return out;
}

void write_landscape_csv(const LandscapeGrid& g, const std::string& path) {
    std::ofstream f = open_out(path, "landscape");
    f << "x,y,q,ax,ay\n";
    for (int iy = 0; iy < g.resolution; ++iy)
        for (int ix = 0; ix < g.resolution; ++ix) {
            const size_t idx = static_cast<size_t>(iy) * g.resolution + ix;
            f << g.xs[ix] << ',' << g.ys[iy] << ',' << g.q[idx] << ',' << g.ax[idx] << ','
              << g.ay[idx] << '\n';
        }
}

void write_peaks_csv(const std::vector<Peak>& peaks, const std::string& path) {
    std::ofstream f = open_out(path, "peaks");
    f << "x,y,q\n";
    for (const Peak& p : peaks) f << p.x << ',' << p.y << ',' << p.q << '\n';
}

void render_landscape_png(const LandscapeGrid& g,
                          const std::vector<std::array<double, 2>>& marks,
                          const std::string& path) {
    const int res = g.resolution;
    cv::Mat qmap(res, res, CV_64F);
    for (int iy = 0; iy < res; ++iy)
        for (int ix = 0; ix < res; ++ix)
            qmap.at<double>(res - 1 - iy, ix) = g.q_at(ix, iy);

    double lo = 0.0, hi = 0.0;
    cv::minMaxLoc(qmap, &lo, &hi);
    cv::Mat u8;
    if (hi > lo)
        qmap.convertTo(u8, CV_8U, 255.0 / (hi - lo), -255.0 * lo / (hi - lo));
    else
        qmap.convertTo(u8, CV_8U, 0.0, 128.0);
    cv::Mat colored;
    cv::applyColorMap(u8, colored, cv::COLORMAP_VIRIDIS);
    cv::Mat img;
    cv::resize(colored, img, {kImagePx, kImagePx}, 0, 0, cv::INTER_NEAREST);

    // Action quiver on a thinned grid.
    const int stride = std::max(1, res / 20);
    const double arrow_px = 0.45 * stride * kImagePx / res;
    for (int iy = stride / 2; iy < res; iy += stride)
        for (int ix = stride / 2; ix < res; ix += stride) {
            const size_t idx = static_cast<size_t>(iy) * res + ix;
            cv::Point2d from = to_px(g.xs[ix], g.ys[iy], g.half_width);
            cv::Point2d to {from.x + g.ax[idx] * arrow_px, from.y - g.ay[idx] * arrow_px};
            cv::arrowedLine(img, from, to, {255, 255, 255}, 1, cv::LINE_AA, 0, 0.3);
        }

    for (const auto& m : marks) {
        cv::Point2d c = to_px(m[0], m[1], g.half_width);
        cv::circle(img, c, 7, {0, 0, 0}, 2, cv::LINE_AA);
        cv::circle(img, c, 2, {0, 0, 0}, -1, cv::LINE_AA);
    }
    if (!cv::imwrite(path, img))
        throw ContractError("landscape: cannot write image '" + path + "'");
}

std::vector<int> goal_histogram(const TrajectoryFan& fan, int goal_count) {
    if (goal_count < 1) throw ContractError("goal_histogram: goal_count must be positive");
    std::vector<int> bins(static_cast<size_t>(goal_count) + 1, 0);
    for (int gidx : fan.reached_goal) {
        if (gidx >= 0 && gidx < goal_count)
            ++bins[static_cast<size_t>(gidx)];
        else
            ++bins.back();
    }
    return bins;
}

int distinct_goals_reached(const TrajectoryFan& fan) {
    std::vector<int> seen;
    for (int gidx : fan.reached_goal)
        if (gidx >= 0 && std::find(seen.begin(), seen.end(), gidx) == seen.end())
            seen.push_back(gidx);
    return static_cast<int>(seen.size());
}

std::vector<TrajectoryFan> sample_trajectories(const DiffusionPolicy& policy, Env& env,
                                               const std::vector<std::array<double, 2>>& starts,
                                               int n, Rng& rng) {
    if (n < 1) throw ContractError("trajectories: n must be positive");
    if (env.state_dim() != 2)
        throw ContractError("trajectories: needs a planar environment");
    std::vector<TrajectoryFan> fans;
    fans.reserve(starts.size());
    for (const auto& start : starts) {
        TrajectoryFan fan;
        fan.start = start;
        fan.polylines.reserve(n);
        fan.reached_goal.reserve(n);
        for (int k = 0; k < n; ++k) {
            std::vector<double> state = env.reset_at({start[0], start[1]});
            std::vector<double> line {state[0], state[1]};
            int reached = -1;
            while (true) {
                EnvStep es = env.step(policy.act(state, rng));
                line.push_back(es.state[0]);
                line.push_back(es.state[1]);
                if (es.done()) {
                    reached = es.reached_goal;
                    break;
                }
                state = es.state;
            }
            fan.polylines.push_back(std::move(line));
            fan.reached_goal.push_back(reached);
        }
        fans.push_back(std::move(fan));
    }
    return fans;
}

void write_trajectories_csv(const std::vector<TrajectoryFan>& fans, const std::string& path) {
    std::ofstream f = open_out(path, "trajectories");
    f << "start_index,start_x,start_y,rollout,point_index,x,y,reached_goal\n";
    for (size_t si = 0; si < fans.size(); ++si) {
        const TrajectoryFan& fan = fans[si];
        for (size_t k = 0; k < fan.polylines.size(); ++k) {
            const auto& line = fan.polylines[k];
            for (size_t p = 0; p + 1 < line.size(); p += 2) {
                f << si << ',' << fan.start[0] << ',' << fan.start[1] << ',' << k << ','
                  << p / 2 << ',' << line[p] << ',' << line[p + 1] << ','
                  << fan.reached_goal[k] << '\n';
            }
        }
    }
}

void render_trajectories_png(const std::vector<TrajectoryFan>& fans, const MultiGoalSpec& spec,
                             const std::string& path) {
    cv::Mat img(kImagePx, kImagePx, CV_8UC3, cv::Scalar(255, 255, 255));
    const double hw = spec.half_width;
    const double px_per_unit = kImagePx / (2.0 * hw);

    for (const auto& goal : spec.goals) {
        cv::Point2d c = to_px(goal[0], goal[1], hw);
        cv::circle(img, c, static_cast<int>(std::lround(spec.goal_radius * px_per_unit)),
                   {60, 60, 60}, 2, cv::LINE_AA);
    }
    for (size_t si = 0; si < fans.size(); ++si) {
        const cv::Scalar color = kFanColors[si % kFanColors.size()];
        for (const auto& line : fans[si].polylines) {
            for (size_t p = 0; p + 3 < line.size(); p += 2) {
                cv::line(img, to_px(line[p], line[p + 1], hw),
                         to_px(line[p + 2], line[p + 3], hw), color, 1, cv::LINE_AA);
            }
        }
        cv::Point2d s = to_px(fans[si].start[0], fans[si].start[1], hw);
        cv::circle(img, s, 4, {0, 0, 0}, -1, cv::LINE_AA);
    }
    if (!cv::imwrite(path, img))
        throw ContractError("trajectories: cannot write image '" + path + "'");
}

} // namespace dacer
