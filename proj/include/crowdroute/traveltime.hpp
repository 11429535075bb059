#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdroute {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Location {
  double x = 0.0;
  double y = 0.0;
  int region = 0;

  Point point() const { return {x, y}; }
  friend bool operator==(const Location&, const Location&) = default;
};

double distance(const Point& a, const Point& b);
double distance(const Location& a, const Location& b);

// bit r set <=> region r lies on the straight line between two points
using RegionMask = std::uint32_t;

inline constexpr int kMaxRegions = 16;

// Rectangular tiling of a bounding box whose south-west corner is (0,0).
// Regions are numbered row-major from the north-west cell, so the default
// 4x2 grid reads A B C D over E F G H.
class Geography {
 public:
  // edges ascend: columns west->east, rows south->north
  Geography(std::vector<double> column_edges, std::vector<double> row_edges);

  static Geography uniform_grid(int columns, int rows, double width_km,
                                double height_km);

  int columns() const { return static_cast<int>(col_edges_.size()) - 1; }
  int rows() const { return static_cast<int>(row_edges_.size()) - 1; }
  int region_count() const { return columns() * rows(); }
  double width() const { return col_edges_.back(); }
  double height() const { return row_edges_.back(); }
  const std::vector<double>& column_edges() const { return col_edges_; }
  const std::vector<double>& row_edges() const { return row_edges_; }

  Point center() const { return {width() / 2.0, height() / 2.0}; }
  Point centroid(int region) const;
  double cell_area(int region) const;
  std::string region_name(int region) const;
  int region_index(const std::string& name) const;

  bool contains(Point p) const;
  Point clamp(Point p) const;
  int region_of(Point p) const;  // clamps first
  Location locate(Point p) const;

  RegionMask regions_crossed(Point a, Point b) const;

 private:
  int column_of(double x) const;
  int row_from_top(double y) const;
  void cell_bounds(int region, double& x0, double& x1, double& y0,
                   double& y1) const;

  std::vector<double> col_edges_;
  std::vector<double> row_edges_;
};

// Piecewise-constant speeds (km/min) per region and period. Period w covers
// [start_w, start_{w+1}); the last period is open-ended.
class SpeedProfile {
 public:
  SpeedProfile(std::vector<double> period_starts,
               std::vector<std::vector<double>> speeds,
               std::vector<double> region_areas);

  int period_count() const { return static_cast<int>(starts_.size()); }
  int region_count() const { return static_cast<int>(speeds_.size()); }
  int period_of(double t) const;
  double period_start(int w) const { return starts_[w]; }
  double period_end(int w) const;
  double speed(int region, int period) const { return speeds_[region][period]; }
  double area(int region) const { return areas_[region]; }
  const std::vector<double>& period_starts() const { return starts_; }

  // area-weighted mean speed over the regions in mask
  double blended_speed(RegionMask mask, int period) const;

 private:
  std::vector<double> starts_;
  std::vector<std::vector<double>> speeds_;
  std::vector<double> areas_;
  std::vector<int> by_minute_;  // period of each whole minute, when every start is one
};

enum class BlendAnchor { endpoints, centroids };

class TravelTimeModel {
 public:
  static constexpr double kAverageSpeed = 13.0 / 30.0;

  TravelTimeModel(Geography geography, SpeedProfile profile,
                  BlendAnchor anchor = BlendAnchor::endpoints);

  static TravelTimeModel standard();

  const Geography& geography() const { return geo_; }
  const SpeedProfile& profile() const { return profile_; }
  BlendAnchor anchor() const { return anchor_; }

  double blended_speed(int from_region, int to_region, int period) const;
  RegionMask path_regions(const Location& from, const Location& to) const;

  double travel_time(const Location& from, const Location& to,
                     double depart) const;
  double average_travel_time(const Location& from, const Location& to) const;

  // time to cover km at the blended speeds of mask, leaving at depart
  double duration(double km, RegionMask mask, double depart) const;
  double speed_for(RegionMask mask, int period) const;

 private:
  Geography geo_;
  SpeedProfile profile_;
  BlendAnchor anchor_;
  std::vector<double> blend_cache_;  // [mask * periods + w], small grids only
};

TravelTimeModel load_travel_model(const std::string& path);
TravelTimeModel travel_model_from_json(const std::string& text);

}  // namespace crowdroute
