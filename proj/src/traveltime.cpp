#include "crowdroute/traveltime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace crowdroute {

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double distance(const Location& a, const Location& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// ---- Geography -------------------------------------------------------------

namespace {

void check_edges(const std::vector<double>& e, const char* what) {
  if (e.size() < 2) throw ConfigError(std::string(what) + ": need at least two edges");
  if (e.front() != 0.0) throw ConfigError(std::string(what) + ": first edge must be 0");
  for (std::size_t i = 1; i < e.size(); ++i)
    if (!(e[i] > e[i - 1]))
      throw ConfigError(std::string(what) + ": edges must be strictly increasing");
}

int interval_of(const std::vector<double>& edges, double v) {
  auto it = std::upper_bound(edges.begin(), edges.end(), v);
  int idx = static_cast<int>(it - edges.begin()) - 1;
  return std::clamp(idx, 0, static_cast<int>(edges.size()) - 2);
}

}  // namespace

Geography::Geography(std::vector<double> column_edges, std::vector<double> row_edges)
    : col_edges_(std::move(column_edges)), row_edges_(std::move(row_edges)) {
  check_edges(col_edges_, "column edges");
  check_edges(row_edges_, "row edges");
  if (region_count() > kMaxRegions)
    throw ConfigError("at most " + std::to_string(kMaxRegions) + " regions are supported");
}

Geography Geography::uniform_grid(int columns, int rows, double width_km, double height_km) {
  if (columns < 1 || rows < 1) throw ConfigError("grid needs at least one row and column");
  if (!(width_km > 0) || !(height_km > 0)) throw ConfigError("grid extent must be positive");
  std::vector<double> cx(columns + 1), ry(rows + 1);
  for (int i = 0; i <= columns; ++i) cx[i] = width_km * i / columns;
  for (int j = 0; j <= rows; ++j) ry[j] = height_km * j / rows;
  return Geography(std::move(cx), std::move(ry));
}

int Geography::column_of(double x) const { return interval_of(col_edges_, x); }

int Geography::row_from_top(double y) const {
  return rows() - 1 - interval_of(row_edges_, y);
}

void Geography::cell_bounds(int region, double& x0, double& x1, double& y0,
                            double& y1) const {
  if (region < 0 || region >= region_count())
    throw std::out_of_range("region index " + std::to_string(region));
  int c = region % columns();
  int r = rows() - 1 - region / columns();
  x0 = col_edges_[c];
  x1 = col_edges_[c + 1];
  y0 = row_edges_[r];
  y1 = row_edges_[r + 1];
}

Point Geography::centroid(int region) const {
  double x0, x1, y0, y1;
  cell_bounds(region, x0, x1, y0, y1);
  return {(x0 + x1) / 2.0, (y0 + y1) / 2.0};
}

double Geography::cell_area(int region) const {
  double x0, x1, y0, y1;
  cell_bounds(region, x0, x1, y0, y1);
  return (x1 - x0) * (y1 - y0);
}

std::string Geography::region_name(int region) const {
  if (region < 0 || region >= region_count())
    throw std::out_of_range("region index " + std::to_string(region));
  return std::string(1, static_cast<char>('A' + region));
}

int Geography::region_index(const std::string& name) const {
  for (int r = 0; r < region_count(); ++r)
    if (region_name(r) == name) return r;
  throw ConfigError("unknown region '" + name + "'");
}

bool Geography::contains(Point p) const {
  return p.x >= 0 && p.x <= width() && p.y >= 0 && p.y <= height();
}

Point Geography::clamp(Point p) const {
  return {std::clamp(p.x, 0.0, width()), std::clamp(p.y, 0.0, height())};
}

int Geography::region_of(Point p) const {
  Point q = clamp(p);
  return row_from_top(q.y) * columns() + column_of(q.x);
}

Location Geography::locate(Point p) const {
  Point q = clamp(p);
  return {q.x, q.y, region_of(q)};
}

RegionMask Geography::regions_crossed(Point a, Point b) const {
  a = clamp(a);
  b = clamp(b);
  RegionMask mask = (RegionMask{1} << region_of(a)) | (RegionMask{1} << region_of(b));
  double dx = b.x - a.x, dy = b.y - a.y;
  if (dx == 0.0 && dy == 0.0) return mask;
  for (int r = 0; r < region_count(); ++r) {
    double x0, x1, y0, y1;
    cell_bounds(r, x0, x1, y0, y1);
    double p[4] = {-dx, dx, -dy, dy};
    double q[4] = {a.x - x0, x1 - a.x, a.y - y0, y1 - a.y};
    double t0 = 0.0, t1 = 1.0;
    bool hit = true;
    for (int i = 0; i < 4 && hit; ++i) {
      if (p[i] == 0.0) {
        if (q[i] < 0.0) hit = false;
      } else {
        double s = q[i] / p[i];
        if (p[i] < 0.0)
          t0 = std::max(t0, s);
        else
          t1 = std::min(t1, s);
        if (t0 > t1) hit = false;
      }
    }
    if (hit && t1 - t0 > 1e-12) mask |= RegionMask{1} << r;
  }
  return mask;
}

// ---- SpeedProfile ----------------------------------------------------------

SpeedProfile::SpeedProfile(std::vector<double> period_starts,
                           std::vector<std::vector<double>> speeds,
                           std::vector<double> region_areas)
    : starts_(std::move(period_starts)),
      speeds_(std::move(speeds)),
      areas_(std::move(region_areas)) {
  if (starts_.empty()) throw ConfigError("speed profile needs at least one period");
  for (std::size_t i = 1; i < starts_.size(); ++i)
    if (!(starts_[i] > starts_[i - 1]))
      throw ConfigError("period starts must be strictly increasing");
  if (speeds_.empty()) throw ConfigError("speed profile needs at least one region");
  if (areas_.size() != speeds_.size())
    throw ConfigError("region areas and speed rows differ in length");
  for (std::size_t r = 0; r < speeds_.size(); ++r) {
    if (speeds_[r].size() != starts_.size())
      throw ConfigError("region " + std::to_string(r) + ": expected " +
                        std::to_string(starts_.size()) + " speeds");
    for (double v : speeds_[r])
      if (!(v > 0) || !std::isfinite(v))
        throw ConfigError("speeds must be positive and finite");
    if (!(areas_[r] > 0)) throw ConfigError("region areas must be positive");
  }
  const double last = starts_.back();
  bool whole = last >= 0.0 && last <= 100000.0;
  for (double s : starts_) whole = whole && s == std::floor(s);
  if (whole) {
    std::vector<int> table(static_cast<std::size_t>(last) + 1);
    for (std::size_t k = 0; k < table.size(); ++k) table[k] = period_of(static_cast<double>(k));
    by_minute_ = std::move(table);
  }
}

int SpeedProfile::period_of(double t) const {
  if (!by_minute_.empty() && t >= 0.0) {
    if (t >= static_cast<double>(by_minute_.size())) return period_count() - 1;
    return by_minute_[static_cast<std::size_t>(t)];
  }
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  int w = static_cast<int>(it - starts_.begin()) - 1;
  return std::max(w, 0);
}

double SpeedProfile::period_end(int w) const {
  if (w + 1 < period_count()) return starts_[w + 1];
  return std::numeric_limits<double>::infinity();
}

double SpeedProfile::blended_speed(RegionMask mask, int period) const {
  double num = 0.0, den = 0.0;
  for (int r = 0; r < region_count(); ++r) {
    if (!(mask & (RegionMask{1} << r))) continue;
    num += areas_[r] * speeds_[r][period];
    den += areas_[r];
  }
  if (den == 0.0) throw std::invalid_argument("empty region mask");
  return num / den;
}

// ---- TravelTimeModel -------------------------------------------------------

TravelTimeModel::TravelTimeModel(Geography geography, SpeedProfile profile,
                                 BlendAnchor anchor)
    : geo_(std::move(geography)), profile_(std::move(profile)), anchor_(anchor) {
  if (profile_.region_count() != geo_.region_count())
    throw ConfigError("speed profile covers " + std::to_string(profile_.region_count()) +
                      " regions, geography has " + std::to_string(geo_.region_count()));
  if (geo_.region_count() <= 12) {
    std::size_t masks = std::size_t{1} << geo_.region_count();
    int w = profile_.period_count();
    blend_cache_.assign(masks * w, 0.0);
    for (std::size_t m = 1; m < masks; ++m)
      for (int p = 0; p < w; ++p)
        blend_cache_[m * w + p] = profile_.blended_speed(static_cast<RegionMask>(m), p);
  }
}

TravelTimeModel TravelTimeModel::standard() {
  Geography geo = Geography::uniform_grid(4, 2, 20.0, 10.0);
  // A..H, periods 8-10, 10-18, 18-20, after 20
  std::vector<std::vector<double>> v = {
      {0.25, 0.40, 0.25, 0.40}, {0.50, 0.67, 0.50, 0.67}, {0.25, 0.40, 0.25, 0.40},
      {0.50, 0.67, 0.50, 0.67}, {0.33, 0.53, 0.33, 0.53}, {0.16, 0.26, 0.16, 0.26},
      {0.33, 0.53, 0.33, 0.53}, {0.50, 0.67, 0.50, 0.67}};
  std::vector<double> areas;
  for (int r = 0; r < geo.region_count(); ++r) areas.push_back(geo.cell_area(r));
  SpeedProfile prof({0.0, 120.0, 600.0, 720.0}, std::move(v), std::move(areas));
  return TravelTimeModel(std::move(geo), std::move(prof));
}

double TravelTimeModel::speed_for(RegionMask mask, int period) const {
  if (!blend_cache_.empty())
    return blend_cache_[static_cast<std::size_t>(mask) * profile_.period_count() + period];
  return profile_.blended_speed(mask, period);
}

double TravelTimeModel::blended_speed(int from_region, int to_region, int period) const {
  RegionMask mask = geo_.regions_crossed(geo_.centroid(from_region), geo_.centroid(to_region));
  mask |= (RegionMask{1} << from_region) | (RegionMask{1} << to_region);
  return speed_for(mask, period);
}

RegionMask TravelTimeModel::path_regions(const Location& from, const Location& to) const {
  RegionMask ends = (RegionMask{1} << from.region) | (RegionMask{1} << to.region);
  if (anchor_ == BlendAnchor::centroids)
    return ends | geo_.regions_crossed(geo_.centroid(from.region), geo_.centroid(to.region));
  return ends | geo_.regions_crossed(from.point(), to.point());
}

double TravelTimeModel::duration(double km, RegionMask mask, double depart) const {
  if (!(km > 0.0)) return 0.0;
  int w = profile_.period_of(depart);
  double v = speed_for(mask, w);
  double end = profile_.period_end(w);
  double first = km / v;
  if (depart + first <= end) return first;
  double t = depart;
  double left = km;
  for (;;) {
    left -= v * (end - t);
    t = end;
    ++w;
    v = speed_for(mask, w);
    end = profile_.period_end(w);
    double need = left / v;
    if (t + need <= end) return t + need - depart;
  }
}

double TravelTimeModel::travel_time(const Location& from, const Location& to,
                                    double depart) const {
  return duration(distance(from, to), path_regions(from, to), depart);
}

double TravelTimeModel::average_travel_time(const Location& from, const Location& to) const {
  return distance(from, to) / kAverageSpeed;
}

// ---- JSON config -----------------------------------------------------------

namespace {

using nlohmann::json;

std::vector<double> number_list(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(key + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

TravelTimeModel model_from_tree(const json& root) {
  if (!root.is_object()) throw ConfigError("travel config: top level must be an object");
  static const char* known[] = {"grid", "periods", "speeds", "region_areas", "blend_anchor"};
  for (auto it = root.begin(); it != root.end(); ++it)
    if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known))
      throw ConfigError("travel config: unknown key '" + it.key() + "'");

  Geography geo = Geography::uniform_grid(4, 2, 20.0, 10.0);
  if (root.contains("grid")) {
    const json& g = root["grid"];
    if (g.contains("column_edges") || g.contains("row_edges")) {
      if (!g.contains("column_edges") || !g.contains("row_edges"))
        throw ConfigError("grid: column_edges and row_edges go together");
      geo = Geography(number_list(g["column_edges"], "grid.column_edges"),
                      number_list(g["row_edges"], "grid.row_edges"));
    } else {
      geo = Geography::uniform_grid(g.value("columns", 4), g.value("rows", 2),
                                    g.value("width_km", 20.0), g.value("height_km", 10.0));
    }
  }

  if (!root.contains("periods") || !root.contains("speeds"))
    throw ConfigError("travel config: 'periods' and 'speeds' are required");
  std::vector<double> starts;
  double prev_end = 0.0;
  for (const auto& p : root["periods"]) {
    auto iv = number_list(p, "periods");
    if (iv.size() != 2 || !(iv[1] > iv[0]))
      throw ConfigError("periods: each entry must be [start, end) with end > start");
    if (!starts.empty() && iv[0] != prev_end)
      throw ConfigError("periods: intervals must be contiguous");
    starts.push_back(iv[0]);
    prev_end = iv[1];
  }

  std::vector<std::vector<double>> speeds(geo.region_count());
  const json& sp = root["speeds"];
  if (sp.is_object()) {
    for (auto it = sp.begin(); it != sp.end(); ++it)
      speeds.at(geo.region_index(it.key())) = number_list(it.value(), "speeds." + it.key());
  } else if (sp.is_array()) {
    if (static_cast<int>(sp.size()) != geo.region_count())
      throw ConfigError("speeds: expected one row per region");
    for (int r = 0; r < geo.region_count(); ++r) speeds[r] = number_list(sp[r], "speeds");
  } else {
    throw ConfigError("speeds: expected an object keyed by region or an array");
  }
  for (int r = 0; r < geo.region_count(); ++r)
    if (speeds[r].empty()) throw ConfigError("speeds: region " + geo.region_name(r) + " missing");

  std::vector<double> areas;
  if (root.contains("region_areas")) {
    areas = number_list(root["region_areas"], "region_areas");
  } else {
    for (int r = 0; r < geo.region_count(); ++r) areas.push_back(geo.cell_area(r));
  }

  BlendAnchor anchor = BlendAnchor::endpoints;
  if (root.contains("blend_anchor")) {
    std::string a = root["blend_anchor"].get<std::string>();
    if (a == "centroids")
      anchor = BlendAnchor::centroids;
    else if (a != "endpoints")
      throw ConfigError("blend_anchor must be 'endpoints' or 'centroids'");
  }
  return TravelTimeModel(std::move(geo), SpeedProfile(std::move(starts), std::move(speeds), std::move(areas)),
                         anchor);
}

}  // namespace

TravelTimeModel travel_model_from_json(const std::string& text) {
  try {
    return model_from_tree(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("travel config: ") + e.what());
  }
}

TravelTimeModel load_travel_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open travel config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return travel_model_from_json(ss.str());
}

}  // namespace crowdroute
