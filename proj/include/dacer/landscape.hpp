#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "dacer/critic.hpp"
#include "dacer/envs.hpp"
#include "dacer/policy.hpp"
#include "dacer/rng.hpp"

namespace dacer {

// Regular scan of the plane [-half_width, half_width]^2: per grid point one
// sampled action and the value assigned to it. Row-major with y as the outer
// index (index = iy * resolution + ix).
struct LandscapeGrid {
    int resolution = 0;
    double half_width = 7.0;
    std::vector<double> xs; // resolution axis coordinates, ascending
    std::vector<double> ys;
    std::vector<double> q;  // resolution^2 values
    std::vector<double> ax; // sampled action, x component
    std::vector<double> ay;

    double q_at(int ix, int iy) const { return q[static_cast<size_t>(iy) * resolution + ix]; }
};

// Pluggable field sources so analytic fields can stand in for trained nets.
using ActionField = std::function<std::array<double, 2>(double x, double y)>;
using ValueField =
    std::function<double(double x, double y, double action_x, double action_y)>;

// Scan the plane with the given fields. resolution must be at least 50.
LandscapeGrid compute_landscape(int resolution, double half_width, const ActionField& action,
                                const ValueField& value);

// The trained wiring: action = one no-noise policy sample at the state,
// value = min of the twin online critics at that action.
LandscapeGrid compute_q_landscape(const DiffusionPolicy& policy, const CriticPair& critics,
                                  int resolution, double half_width, Rng& rng);

struct Peak {
    double x = 0.0;
    double y = 0.0;
    double q = 0.0;
};

// Interior grid points strictly above all 8 neighbours, best-first.
std::vector<Peak> detect_peaks(const LandscapeGrid& grid);

// Merge peaks closer than `radius` (transitively); each cluster is represented
// by its highest member.
std::vector<Peak> cluster_peaks(const std::vector<Peak>& peaks, double radius);

void write_landscape_csv(const LandscapeGrid& grid, const std::string& path);
void write_peaks_csv(const std::vector<Peak>& peaks, const std::string& path);

// Heatmap of q with an action quiver overlay; `marks` (e.g. goal positions)
// are drawn as circles.
void render_landscape_png(const LandscapeGrid& grid,
                          const std::vector<std::array<double, 2>>& marks,
                          const std::string& path);

// One start point fanned out into n rollouts.
struct TrajectoryFan {
    std::array<double, 2> start {0.0, 0.0};
    std::vector<std::vector<double>> polylines; // per rollout: x0,y0,x1,y1,...
    std::vector<int> reached_goal;              // per rollout, -1 if none
};

// Count of rollouts per goal index; the extra last bin counts "no goal".
std::vector<int> goal_histogram(const TrajectoryFan& fan, int goal_count);
int distinct_goals_reached(const TrajectoryFan& fan);

// n no-noise rollouts from each start (starts must lie inside the plane).
std::vector<TrajectoryFan> sample_trajectories(const DiffusionPolicy& policy, Env& env,
                                               const std::vector<std::array<double, 2>>& starts,
                                               int n, Rng& rng);

void write_trajectories_csv(const std::vector<TrajectoryFan>& fans, const std::string& path);
void render_trajectories_png(const std::vector<TrajectoryFan>& fans, const MultiGoalSpec& spec,
                             const std::string& path);

} // namespace dacer
