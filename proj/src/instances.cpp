#include "crowdroute/instances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace crowdroute {

std::string to_string(InstanceClass c) {
  switch (c) {
    case InstanceClass::uo: return "UO";
    case InstanceClass::nm: return "NM";
    case InstanceClass::mto: return "MTO";
    case InstanceClass::otm: return "OTM";
  }
  return "?";
}

std::string to_string(DemandLevel d) {
  switch (d) {
    case DemandLevel::low: return "low";
    case DemandLevel::medium: return "medium";
    case DemandLevel::high: return "high";
  }
  return "?";
}

std::string to_string(VehicleKind k) {
  return k == VehicleKind::dedicated ? "dedicated" : "crowd";
}

InstanceClass parse_instance_class(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
  if (u == "UO") return InstanceClass::uo;
  if (u == "NM") return InstanceClass::nm;
  if (u == "MTO") return InstanceClass::mto;
  if (u == "OTM") return InstanceClass::otm;
  throw std::invalid_argument("unknown instance class '" + s + "'");
}

DemandLevel parse_demand_level(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "low") return DemandLevel::low;
  if (l == "medium" || l == "med") return DemandLevel::medium;
  if (l == "high") return DemandLevel::high;
  throw std::invalid_argument("unknown demand level '" + s + "'");
}

// ---- tables --------------------------------------------------------------

namespace {

constexpr double kShortLow[kBusinessHours] = {3.75, 11.25, 18.75, 15.0, 11.25,
                                              3.75, 3.75,  11.25, 18.75, 15.0};

double level_scale(DemandLevel level) {
  switch (level) {
    case DemandLevel::low: return 1.0;
    case DemandLevel::medium: return 4.0 / 3.0;
    case DemandLevel::high: return 5.0 / 3.0;
  }
  return 1.0;
}

constexpr double kOtmSizes[6] = {0.782368, 0.192354, 0.023308, 0.001856, 0.000109, 0.000005};
constexpr double kMtoSizes[3] = {0.90, 0.075, 0.025};

constexpr CrowdshipperRecord kCrowd[kCrowdshipperCount] = {
    {1, 1, 120, 41.63562541, -91.51196350, 41.65909800, -91.55525400},
    {2, 60, 180, 41.63562541, -91.51196354, 41.69834515, -91.58892941},
    {3, 70, 310, 41.64128623, -91.56508335, 41.65806850, -91.53102480},
    {4, 90, 270, 41.64885944, -91.55320966, 41.64506561, -91.52355511},
    {5, 115, 295, 41.71443676, -91.58289955, 41.66152363, -91.47081150},
    {6, 115, 355, 41.67312935, -91.57551051, 41.72164463, -91.59286545},
    {7, 130, 250, 41.65001141, -91.46857959, 41.72164463, -91.59286545},
    {8, 135, 315, 41.63917026, -91.51290389, 41.76164463, -91.69286545},
    {9, 140, 320, 41.66699952, -91.48110701, 41.63562541, -91.51196354},
    {10, 145, 385, 41.68153099, -91.57331503, 41.64128623, -91.56508335},
    {11, 160, 340, 41.67950253, -91.57390402, 41.71443676, -91.58289955},
    {12, 170, 350, 41.63511630, -91.51468220, 41.67312935, -91.57551051},
    {13, 190, 430, 41.65263384, -91.58594751, 41.65001141, -91.46857959},
    {14, 220, 400, 41.65345535, -91.52692116, 41.66699952, -91.48110701},
    {15, 250, 370, 41.64186230, -91.56777907, 41.63917026, -91.51290389},
    {16, 255, 495, 41.65787087, -91.46407211, 41.64885944, -91.55320966},
    {17, 300, 420, 41.70314675, -91.60940027, 41.63583000, -91.51710000},
    {18, 310, 390, 41.69834515, -91.58892941, 41.66309000, -91.57927000},
    {19, 330, 450, 41.69986134, -91.56992240, 41.65371000, -91.49574000},
    {20, 360, 580, 41.65778645, -91.56992240, 41.65529000, -91.53254000},
    {21, 375, 535, 41.69835544, -91.58876611, 41.65430000, -91.54275000},
    {22, 390, 540, 41.70713817, -91.58440115, 41.66103000, -91.54609000},
    {23, 420, 620, 41.61927800, -91.53541100, 41.65157319, -91.48818436},
    {24, 480, 630, 41.64975200, -91.51395990, 41.66605613, -91.51510378},
    {25, 525, 660, 41.66704200, -91.53342870, 41.68642773, -91.51032070},
    {26, 555, 705, 41.64885944, -91.55320966, 41.63202532, -91.50501068},
    {27, 570, 720, 41.64199910, -91.52728740, 41.69894765, -91.50420625},
    {28, 590, 750, 41.65911430, -91.54442830, 41.64894115, -91.58800303},
};

double horizon_of(InstanceClass c) { return c == InstanceClass::uo ? 420.0 : 600.0; }

}  // namespace

double short_rate(DemandLevel level, int hour) {
  if (hour < 0 || hour >= kBusinessHours) throw std::out_of_range("hour outside business day");
  return kShortLow[hour] * level_scale(level);
}

double long_rate(DemandLevel level, int hour) {
  if (hour < 0 || hour >= kBusinessHours) throw std::out_of_range("hour outside business day");
  return 11.25 * level_scale(level);
}

double uo_rate(DemandLevel level) {
  switch (level) {
    case DemandLevel::low: return 25.71;
    case DemandLevel::medium: return 34.29;
    case DemandLevel::high: return 42.86;
  }
  return 0.0;
}

double expected_request_count(InstanceClass c, DemandLevel level) {
  if (c == InstanceClass::uo) return uo_rate(level) * 7.0;
  double total = 0.0;
  for (int h = 0; h < kBusinessHours; ++h) total += short_rate(level, h) + long_rate(level, h);
  return total;
}

std::span<const double> otm_size_distribution() { return kOtmSizes; }
std::span<const double> mto_size_distribution() { return kMtoSizes; }
std::span<const CrowdshipperRecord> crowdshipper_table() { return kCrowd; }

Point project_crowdshipper_point(const Geography& geo, double lat, double lon) {
  static const auto anchor = [] {
    double la = 0.0, lo = 0.0;
    for (const auto& c : kCrowd) {
      la += c.start_lat + c.end_lat;
      lo += c.start_lon + c.end_lon;
    }
    return std::pair{la / (2.0 * kCrowdshipperCount), lo / (2.0 * kCrowdshipperCount)};
  }();
  constexpr double radius_km = 6371.0;
  const double deg = std::numbers::pi / 180.0;
  double x = radius_km * (lon - anchor.second) * deg * std::cos(anchor.first * deg);
  double y = radius_km * (lat - anchor.first) * deg;
  Point c = geo.center();
  return geo.clamp({c.x + x, c.y + y});
}

// ---- pools and fleet -----------------------------------------------------

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

Location uniform_location(const Geography& geo, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0.0, geo.width()), uy(0.0, geo.height());
  double x = ux(rng);
  double y = uy(rng);
  return geo.locate({x, y});
}

}  // namespace

LocationPools LocationPools::build(const Geography& geo, std::uint64_t seed) {
  LocationPools p;
  auto rng = stream_rng(seed, 0);
  for (int i = 0; i < kShortPickupCount + kLongPickupCount; ++i)
    p.pickups.push_back(uniform_location(geo, rng));
  for (int i = 0; i < kDeliveryPoolSize; ++i) p.deliveries.push_back(uniform_location(geo, rng));
  return p;
}

std::span<const Location> LocationPools::short_pickups() const {
  return std::span<const Location>(pickups).first(kShortPickupCount);
}

std::span<const Location> LocationPools::long_pickups() const {
  return std::span<const Location>(pickups).subspan(kShortPickupCount);
}

std::vector<VehicleSpec> build_fleet(InstanceClass c, const Geography& geo) {
  const bool uo = c == InstanceClass::uo;
  const int dedicated = uo ? 3 : 5;
  const int crowd = uo ? 22 : kCrowdshipperCount;
  const double hard_end = horizon_of(c) + 600.0;
  Location depot = geo.locate(geo.center());
  std::vector<VehicleSpec> fleet;
  for (int i = 0; i < dedicated; ++i)
    fleet.push_back({i, VehicleKind::dedicated, 0.0, hard_end, depot, depot});
  for (int g = 0; g < crowd; ++g) {
    const auto& rec = kCrowd[g];
    VehicleSpec v;
    v.id = dedicated + g;
    v.kind = VehicleKind::crowdshipper;
    v.appear = rec.appear;
    v.expire = rec.expire;
    v.start = geo.locate(project_crowdshipper_point(geo, rec.start_lat, rec.start_lon));
    v.finish = geo.locate(project_crowdshipper_point(geo, rec.end_lat, rec.end_lon));
    fleet.push_back(v);
  }
  return fleet;
}

// ---- generation ----------------------------------------------------------

namespace {

struct Draft {
  Request req;
  int order = 0;  // generation order, breaks arrival ties
};

template <class F>
void poisson_segment(std::mt19937_64& rng, double rate_per_hour, double from, double to, F&& emit) {
  if (rate_per_hour <= 0.0) return;
  std::exponential_distribution<double> gap(rate_per_hour / 60.0);
  double t = from;
  for (;;) {
    t += gap(rng);
    if (t >= to) return;
    emit(t);
  }
}

template <class T>
const T& pick(std::span<const T> pool, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> u(0, pool.size() - 1);
  return pool[u(rng)];
}

Request make_request(const Location& o, const Location& d, double arrival, WindowOffsets w) {
  Request r;
  r.pickup = o;
  r.delivery = d;
  r.arrival = arrival;
  r.ready = arrival + w.ready;
  r.deadline = arrival + w.deadline;
  return r;
}

class Builder {
 public:
  void add(Request r) { drafts_.push_back({std::move(r), static_cast<int>(drafts_.size())}); }
  int next_bundle() { return bundles_++; }

  std::vector<Request> finish() {
    std::stable_sort(drafts_.begin(), drafts_.end(), [](const Draft& a, const Draft& b) {
      return a.req.arrival < b.req.arrival;
    });
    std::map<int, int> relabel;
    std::vector<Request> out;
    for (auto& d : drafts_) {
      Request r = d.req;
      r.id = static_cast<int>(out.size());
      if (r.bundle >= 0) r.bundle = relabel.try_emplace(r.bundle, static_cast<int>(relabel.size())).first->second;
      out.push_back(r);
    }
    return out;
  }

 private:
  std::vector<Draft> drafts_;
  int bundles_ = 0;
};

void add_short_stream(Builder& b, DemandLevel level, std::uint64_t seed, const LocationPools& pools) {
  auto rng = stream_rng(seed, 1);
  for (int h = 0; h < kBusinessHours; ++h)
    poisson_segment(rng, short_rate(level, h), h * 60.0, (h + 1) * 60.0, [&](double t) {
      const Location& o = pick(pools.short_pickups(), rng);
      const Location& d = pick(std::span<const Location>(pools.deliveries), rng);
      b.add(make_request(o, d, t, kShortWindow));
    });
}

void add_long_nm(Builder& b, DemandLevel level, std::uint64_t seed, const LocationPools& pools) {
  auto rng = stream_rng(seed, 2);
  for (int h = 0; h < kBusinessHours; ++h)
    poisson_segment(rng, long_rate(level, h), h * 60.0, (h + 1) * 60.0, [&](double t) {
      const Location& o = pick(pools.long_pickups(), rng);
      const Location& d = pick(std::span<const Location>(pools.deliveries), rng);
      b.add(make_request(o, d, t, kLongWindow));
    });
}

int draw_size(std::span<const double> weights, std::mt19937_64& rng) {
  std::discrete_distribution<int> dist(weights.begin(), weights.end());
  return dist(rng) + 1;
}

void add_long_mto(Builder& b, DemandLevel level, std::uint64_t seed, const LocationPools& pools) {
  auto rng = stream_rng(seed, 3);
  double mean = 0.0;
  for (int n = 1; n <= 3; ++n) mean += n * kMtoSizes[n - 1];
  auto longs = pools.long_pickups();
  for (int h = 0; h < kBusinessHours; ++h)
    poisson_segment(rng, long_rate(level, h) / mean, h * 60.0, (h + 1) * 60.0, [&](double t) {
      int n = draw_size(kMtoSizes, rng);
      const Location& d = pick(std::span<const Location>(pools.deliveries), rng);
      std::vector<std::size_t> idx(longs.size());
      std::iota(idx.begin(), idx.end(), 0);
      for (int k = 0; k < n; ++k) {
        std::uniform_int_distribution<std::size_t> u(k, idx.size() - 1);
        std::swap(idx[k], idx[u(rng)]);
      }
      int bundle = n > 1 ? b.next_bundle() : -1;
      for (int k = 0; k < n; ++k) {
        Request r = make_request(longs[idx[k]], d, t, kLongWindow);
        r.bundle = bundle;
        b.add(r);
      }
    });
}

void add_long_otm(Builder& b, DemandLevel level, std::uint64_t seed, const LocationPools& pools,
                  const Geography& geo, double horizon) {
  auto rng = stream_rng(seed, 4);
  // the table gives request-level shares; convert to a bundle-level law
  std::array<double, 6> q{};
  double z = 0.0;
  for (int n = 1; n <= 6; ++n) z += kOtmSizes[n - 1] / n;
  for (int n = 1; n <= 6; ++n) q[n - 1] = kOtmSizes[n - 1] / n / z;
  const double radius = kOtmCloseness / 2.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int h = 0; h < kBusinessHours; ++h)
    poisson_segment(rng, long_rate(level, h) * z, h * 60.0, (h + 1) * 60.0, [&](double t) {
      int n = draw_size(q, rng);
      const Location& o = pick(pools.long_pickups(), rng);
      const Location& d = pick(std::span<const Location>(pools.deliveries), rng);
      int bundle = n > 1 ? b.next_bundle() : -1;
      Request trigger = make_request(o, d, t, kLongWindow);
      trigger.bundle = bundle;
      b.add(trigger);
      double window = std::min(30.0, horizon - t);
      for (int k = 1; k < n; ++k) {
        double lag = (1.0 - unit(rng)) * window;  // (0, window]
        double rr = radius * std::sqrt(unit(rng));
        double ang = 2.0 * std::numbers::pi * unit(rng);
        Location fd = geo.locate({d.x + rr * std::cos(ang), d.y + rr * std::sin(ang)});
        Request f = make_request(o, fd, t + lag, kLongWindow);
        f.bundle = bundle;
        b.add(f);
      }
    });
}

void add_uo(Builder& b, DemandLevel level, std::uint64_t seed, const LocationPools& pools) {
  auto rng = stream_rng(seed, 5);
  poisson_segment(rng, uo_rate(level), 0.0, 420.0, [&](double t) {
    const Location& o = pick(pools.short_pickups(), rng);
    const Location& d = pick(std::span<const Location>(pools.deliveries), rng);
    b.add(make_request(o, d, t, kUoWindow));
  });
}

}  // namespace

Instance generate_instance(InstanceClass c, DemandLevel level, std::uint64_t seed,
                           const Geography& geo, const LocationPools& pools) {
  Instance inst;
  inst.instance_class = c;
  inst.level = level;
  inst.seed = seed;
  inst.horizon = horizon_of(c);
  inst.hard_end = inst.horizon + 600.0;
  Builder b;
  switch (c) {
    case InstanceClass::uo:
      add_uo(b, level, seed, pools);
      break;
    case InstanceClass::nm:
      add_short_stream(b, level, seed, pools);
      add_long_nm(b, level, seed, pools);
      break;
    case InstanceClass::mto:
      add_short_stream(b, level, seed, pools);
      add_long_mto(b, level, seed, pools);
      break;
    case InstanceClass::otm:
      add_short_stream(b, level, seed, pools);
      add_long_otm(b, level, seed, pools, geo, inst.horizon);
      break;
  }
  inst.requests = b.finish();
  inst.fleet = build_fleet(c, geo);
  return inst;
}

Instance generate_instance(InstanceClass c, DemandLevel level, std::uint64_t seed) {
  static const Geography geo = TravelTimeModel::standard().geography();
  static const LocationPools pools = LocationPools::build(geo);
  return generate_instance(c, level, seed, geo, pools);
}

// ---- validation ----------------------------------------------------------

void validate(const Instance& inst) {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  if (!(inst.horizon > 0) || !(inst.hard_end > inst.horizon)) fail("need 0 < T < T-hat");
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inst.requests.size(); ++i) {
    const Request& r = inst.requests[i];
    std::string tag = "request " + std::to_string(r.id) + ": ";
    if (r.id != static_cast<int>(i)) fail(tag + "ids must be 0..n-1 in file order");
    if (!std::isfinite(r.arrival) || !std::isfinite(r.ready) || !std::isfinite(r.deadline))
      fail(tag + "non-finite time");
    if (r.arrival < prev) fail(tag + "requests must be sorted by arrival");
    prev = r.arrival;
    if (r.arrival < 0 || r.arrival > inst.horizon) fail(tag + "arrival outside [0, T]");
    if (r.arrival > r.ready) fail(tag + "arrival after ready time");
    if (!(r.ready < r.deadline)) fail(tag + "ready time must precede deadline");
  }
  bool any_dedicated = false;
  for (std::size_t i = 0; i < inst.fleet.size(); ++i) {
    const VehicleSpec& v = inst.fleet[i];
    std::string tag = "vehicle " + std::to_string(v.id) + ": ";
    if (v.id != static_cast<int>(i)) fail(tag + "ids must be 0..m-1 in file order");
    if (!(v.appear < v.expire)) fail(tag + "a must precede b");
    if (v.appear < 0 || v.expire > inst.hard_end) fail(tag + "window outside [0, T-hat]");
    if (v.kind == VehicleKind::dedicated) {
      any_dedicated = true;
      if (v.appear != 0.0 || v.expire != inst.hard_end || !(v.start == v.finish))
        fail(tag + "dedicated vehicles run 0..T-hat from and to the depot");
    }
  }
  if (!any_dedicated) fail("fleet needs at least one dedicated vehicle");
}

// ---- persistence ---------------------------------------------------------

namespace {

constexpr const char* kMagic = "crowdroute-instance";
constexpr int kFormatVersion = 1;

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void put_location(std::ostream& os, const Location& l) {
  os << ' ' << fmt(l.x) << ' ' << fmt(l.y) << ' ' << l.region;
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  // next non-empty, non-comment line split on whitespace
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      fields.clear();
      std::string f;
      while (ss >> f) fields.push_back(f);
      if (!fields.empty()) return true;
    }
    return false;
  }

  std::vector<std::string> expect(const char* what) {
    std::vector<std::string> f;
    if (!next(f)) throw ParseError(std::string("unexpected end of file, expected ") + what, line_ + 1);
    return f;
  }

  int line() const { return line_; }

 private:
  std::istringstream in_;
  int line_ = 0;
};

double parse_double(const std::string& s, const char* field, int line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(std::string("field '") + field + "': not a number: '" + s + "'", line);
  return v;
}

long long parse_int(const std::string& s, const char* field, int line) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(std::string("field '") + field + "': not an integer: '" + s + "'", line);
  return v;
}

std::uint64_t parse_u64(const std::string& s, const char* field, int line) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(std::string("field '") + field + "': not an unsigned integer: '" + s + "'", line);
  return v;
}

const std::string& keyed(const std::vector<std::string>& f, const char* key, int line) {
  if (f.size() != 2 || f[0] != key)
    throw ParseError(std::string("expected '") + key + " <value>'", line);
  return f[1];
}

Location parse_location(const std::vector<std::string>& f, std::size_t at, const char* what, int line) {
  std::string fx = std::string(what) + "_x", fy = std::string(what) + "_y",
              fr = std::string(what) + "_region";
  Location l;
  l.x = parse_double(f[at], fx.c_str(), line);
  l.y = parse_double(f[at + 1], fy.c_str(), line);
  long long r = parse_int(f[at + 2], fr.c_str(), line);
  if (r < 0 || r >= kMaxRegions) throw ParseError("field '" + fr + "': out of range", line);
  l.region = static_cast<int>(r);
  return l;
}

}  // namespace

std::string serialize_instance(const Instance& inst) {
  std::ostringstream os;
  os << kMagic << ' ' << kFormatVersion << '\n';
  os << "# R id o_x o_y o_region d_x d_y d_region arrival e l bundle\n";
  os << "# V id kind a b start_x start_y start_region end_x end_y end_region\n";
  os << "class " << to_string(inst.instance_class) << '\n';
  os << "level " << to_string(inst.level) << '\n';
  os << "seed " << inst.seed << '\n';
  os << "horizon " << fmt(inst.horizon) << '\n';
  os << "hard_end " << fmt(inst.hard_end) << '\n';
  os << "requests " << inst.requests.size() << '\n';
  for (const Request& r : inst.requests) {
    os << "R " << r.id;
    put_location(os, r.pickup);
    put_location(os, r.delivery);
    os << ' ' << fmt(r.arrival) << ' ' << fmt(r.ready) << ' ' << fmt(r.deadline) << ' ' << r.bundle
       << '\n';
  }
  os << "vehicles " << inst.fleet.size() << '\n';
  for (const VehicleSpec& v : inst.fleet) {
    os << "V " << v.id << ' ' << to_string(v.kind) << ' ' << fmt(v.appear) << ' ' << fmt(v.expire);
    put_location(os, v.start);
    put_location(os, v.finish);
    os << '\n';
  }
  os << "end\n";
  return os.str();
}

Instance parse_instance(const std::string& text) {
  LineReader rd(text);
  Instance inst;
  auto f = rd.expect("header");
  if (f.size() != 2 || f[0] != kMagic) throw ParseError("not an instance file", rd.line());
  if (parse_int(f[1], "version", rd.line()) != kFormatVersion)
    throw ParseError("unsupported format version " + f[1], rd.line());
  try {
    inst.instance_class = parse_instance_class(keyed(rd.expect("class"), "class", rd.line()));
    inst.level = parse_demand_level(keyed(rd.expect("level"), "level", rd.line()));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), rd.line());
  }
  inst.seed = parse_u64(keyed(rd.expect("seed"), "seed", rd.line()), "seed", rd.line());
  inst.horizon = parse_double(keyed(rd.expect("horizon"), "horizon", rd.line()), "horizon", rd.line());
  inst.hard_end = parse_double(keyed(rd.expect("hard_end"), "hard_end", rd.line()), "hard_end", rd.line());
  long long n = parse_int(keyed(rd.expect("requests"), "requests", rd.line()), "requests", rd.line());
  if (n < 0) throw ParseError("negative request count", rd.line());
  for (long long i = 0; i < n; ++i) {
    f = rd.expect("request line");
    int ln = rd.line();
    if (f.size() != 12 || f[0] != "R") throw ParseError("request line needs 'R' and 11 fields", ln);
    Request r;
    r.id = static_cast<int>(parse_int(f[1], "id", ln));
    r.pickup = parse_location(f, 2, "o", ln);
    r.delivery = parse_location(f, 5, "d", ln);
    r.arrival = parse_double(f[8], "arrival", ln);
    r.ready = parse_double(f[9], "e", ln);
    r.deadline = parse_double(f[10], "l", ln);
    r.bundle = static_cast<int>(parse_int(f[11], "bundle", ln));
    inst.requests.push_back(r);
  }
  long long m = parse_int(keyed(rd.expect("vehicles"), "vehicles", rd.line()), "vehicles", rd.line());
  if (m < 0) throw ParseError("negative vehicle count", rd.line());
  for (long long i = 0; i < m; ++i) {
    f = rd.expect("vehicle line");
    int ln = rd.line();
    if (f.size() != 11 || f[0] != "V") throw ParseError("vehicle line needs 'V' and 10 fields", ln);
    VehicleSpec v;
    v.id = static_cast<int>(parse_int(f[1], "id", ln));
    if (f[2] == "dedicated")
      v.kind = VehicleKind::dedicated;
    else if (f[2] == "crowd")
      v.kind = VehicleKind::crowdshipper;
    else
      throw ParseError("field 'kind': expected dedicated or crowd", ln);
    v.appear = parse_double(f[3], "a", ln);
    v.expire = parse_double(f[4], "b", ln);
    v.start = parse_location(f, 5, "start", ln);
    v.finish = parse_location(f, 8, "end", ln);
    inst.fleet.push_back(v);
  }
  f = rd.expect("end");
  if (f.size() != 1 || f[0] != "end") throw ParseError("expected 'end'", rd.line());
  if (rd.next(f)) throw ParseError("trailing content after 'end'", rd.line());
  validate(inst);
  return inst;
}

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  out << serialize_instance(inst);
  if (!out) throw std::ios_base::failure("write failed for '" + path + "'");
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

}  // namespace crowdroute
