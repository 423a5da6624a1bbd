#include "walker/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace walker::io {

using nlohmann::json;

namespace {

constexpr double kDegToRad = M_PI / 180.0;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  if (!obj.is_object()) throw ValidationError(context + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) throw ValidationError("unknown key '" + key + "' in " + context);
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ValidationError(std::string("bad value for '") + key + "'");
    }
  }
}

mech::GroundProfile parse_ground(const json& g) {
  check_keys(g, {"kind", "angle_deg", "omega", "sin", "cos"}, "sim.ground");
  std::string kind = "flat";
  read_field(g, "kind", kind);
  if (kind == "flat") return mech::GroundProfile::flat();
  if (kind == "slope") {
    double angle_deg = 0.0;
    read_field(g, "angle_deg", angle_deg);
    return mech::GroundProfile::slope(angle_deg * kDegToRad);
  }
  if (kind == "fourier") {
    double omega = 0.0;
    std::vector<double> sin_coeffs, cos_coeffs;
    read_field(g, "omega", omega);
    read_field(g, "sin", sin_coeffs);
    read_field(g, "cos", cos_coeffs);
    return mech::GroundProfile::fourier(omega, std::move(sin_coeffs), std::move(cos_coeffs));
  }
  throw ValidationError("sim.ground.kind must be flat, slope, or fourier");
}

json dump_ground(const mech::GroundProfile& g) {
  json out;
  switch (g.kind) {
    case mech::GroundProfile::Kind::Flat:
      out["kind"] = "flat";
      break;
    case mech::GroundProfile::Kind::Slope:
      out["kind"] = "slope";
      out["angle_deg"] = g.slope_angle / kDegToRad;
      break;
    case mech::GroundProfile::Kind::Fourier:
      out["kind"] = "fourier";
      out["omega"] = g.omega;
      out["sin"] = g.sin_coeffs;
      out["cos"] = g.cos_coeffs;
      break;
  }
  return out;
}

int gene_index_by_name(const std::string& name) {
  for (int i = 0; i < evolution::kNumGenes; ++i) {
    if (name == evolution::gene_name(i)) return i;
  }
  throw ValidationError("unknown gene name '" + name + "' in ga.bounds");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, {"sim", "ga", "frame_stride"}, "config");

  RunConfig cfg;
  if (root.contains("sim")) {
    const json& sim = root["sim"];
    check_keys(sim,
               {"geometry", "contact", "ground", "gravity", "omega_max", "dt", "duration",
                "drop_height", "stride", "terminate_on_fall", "initial_state"},
               "sim");
    if (sim.contains("geometry")) {
      const json& g = sim["geometry"];
      check_keys(g, {"m", "m1", "l1", "m2", "l2"}, "sim.geometry");
      read_field(g, "m", cfg.sim.geometry.m);
      read_field(g, "m1", cfg.sim.geometry.m1);
      read_field(g, "l1", cfg.sim.geometry.l1);
      read_field(g, "m2", cfg.sim.geometry.m2);
      read_field(g, "l2", cfg.sim.geometry.l2);
    }
    if (sim.contains("contact")) {
      const json& c = sim["contact"];
      check_keys(c, {"k_g", "b_g", "k_anchor", "b_anchor", "mu"}, "sim.contact");
      read_field(c, "k_g", cfg.sim.contact.k_g);
      read_field(c, "b_g", cfg.sim.contact.b_g);
      read_field(c, "k_anchor", cfg.sim.contact.k_anchor);
      read_field(c, "b_anchor", cfg.sim.contact.b_anchor);
      read_field(c, "mu", cfg.sim.contact.mu);
    }
    if (sim.contains("ground")) cfg.sim.ground = parse_ground(sim["ground"]);
    read_field(sim, "gravity", cfg.sim.gravity);
    read_field(sim, "omega_max", cfg.sim.limit.omega_max);
    read_field(sim, "dt", cfg.sim.dt);
    read_field(sim, "duration", cfg.sim.duration);
    read_field(sim, "drop_height", cfg.sim.drop_height);
    read_field(sim, "stride", cfg.sim.stride);
    read_field(sim, "terminate_on_fall", cfg.sim.terminate_on_fall);
    if (sim.contains("initial_state")) {
      const json& r = sim["initial_state"];
      check_keys(r, {"u1_scale", "u2_scale", "v1", "v2", "antiphase_right"}, "sim.initial_state");
      read_field(r, "u1_scale", cfg.sim.initial_state.u1_scale);
      read_field(r, "u2_scale", cfg.sim.initial_state.u2_scale);
      read_field(r, "v1", cfg.sim.initial_state.v1);
      read_field(r, "v2", cfg.sim.initial_state.v2);
      read_field(r, "antiphase_right", cfg.sim.initial_state.antiphase_right);
    }
  }
  if (root.contains("ga")) {
    const json& ga = root["ga"];
    check_keys(ga,
               {"population_size", "tournament_size", "tournament_p", "crossover_p", "mutation_p",
                "elitism", "generations", "rng_seed", "threads", "fitness_floor", "bounds"},
               "ga");
    read_field(ga, "population_size", cfg.ga.population_size);
    read_field(ga, "tournament_size", cfg.ga.tournament_size);
    read_field(ga, "tournament_p", cfg.ga.tournament_p);
    read_field(ga, "crossover_p", cfg.ga.crossover_p);
    read_field(ga, "mutation_p", cfg.ga.mutation_p);
    read_field(ga, "elitism", cfg.ga.elitism);
    read_field(ga, "generations", cfg.ga.generations);
    read_field(ga, "rng_seed", cfg.ga.rng_seed);
    read_field(ga, "threads", cfg.ga.threads);
    read_field(ga, "fitness_floor", cfg.ga.fitness_floor);
    if (ga.contains("bounds")) {
      for (const auto& [name, interval] : ga["bounds"].items()) {
        const int idx = gene_index_by_name(name);
        if (!interval.is_array() || interval.size() != 2) {
          throw ValidationError("bounds for gene '" + name + "' must be [lo, hi]");
        }
        cfg.ga.bounds.intervals[idx] = {interval[0].get<double>(), interval[1].get<double>()};
      }
    }
  }
  read_field(root, "frame_stride", cfg.frame_stride);
  if (cfg.frame_stride < 1) throw ValidationError("frame_stride must be >= 1");

  cfg.sim.validate();
  cfg.ga.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  json bounds;
  for (int i = 0; i < evolution::kNumGenes; ++i) {
    bounds[evolution::gene_name(i)] = {cfg.ga.bounds.intervals[i].first,
                                       cfg.ga.bounds.intervals[i].second};
  }
  const json root = {
      {"sim",
       {{"geometry",
         {{"m", cfg.sim.geometry.m},
          {"m1", cfg.sim.geometry.m1},
          {"l1", cfg.sim.geometry.l1},
          {"m2", cfg.sim.geometry.m2},
          {"l2", cfg.sim.geometry.l2}}},
        {"contact",
         {{"k_g", cfg.sim.contact.k_g},
          {"b_g", cfg.sim.contact.b_g},
          {"k_anchor", cfg.sim.contact.k_anchor},
          {"b_anchor", cfg.sim.contact.b_anchor},
          {"mu", cfg.sim.contact.mu}}},
        {"ground", dump_ground(cfg.sim.ground)},
        {"gravity", cfg.sim.gravity},
        {"omega_max", cfg.sim.limit.omega_max},
        {"dt", cfg.sim.dt},
        {"duration", cfg.sim.duration},
        {"drop_height", cfg.sim.drop_height},
        {"stride", cfg.sim.stride},
        {"terminate_on_fall", cfg.sim.terminate_on_fall},
        {"initial_state",
         {{"u1_scale", cfg.sim.initial_state.u1_scale},
          {"u2_scale", cfg.sim.initial_state.u2_scale},
          {"v1", cfg.sim.initial_state.v1},
          {"v2", cfg.sim.initial_state.v2},
          {"antiphase_right", cfg.sim.initial_state.antiphase_right}}}}},
      {"ga",
       {{"population_size", cfg.ga.population_size},
        {"tournament_size", cfg.ga.tournament_size},
        {"tournament_p", cfg.ga.tournament_p},
        {"crossover_p", cfg.ga.crossover_p},
        {"mutation_p", cfg.ga.mutation_p},
        {"elitism", cfg.ga.elitism},
        {"generations", cfg.ga.generations},
        {"rng_seed", cfg.ga.rng_seed},
        {"threads", cfg.ga.threads},
        {"fitness_floor", cfg.ga.fitness_floor},
        {"bounds", bounds}}},
      {"frame_stride", cfg.frame_stride},
  };
  return root.dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string text = dump_run_config(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash_hex(const RunConfig& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

std::string dump_individual(const IndividualFile& ind, const evolution::GeneBounds& bounds) {
  const evolution::Decoded decoded = evolution::decode(ind.chromosome, bounds);

  json genes;
  for (int i = 0; i < evolution::kNumGenes; ++i) {
    genes[evolution::gene_name(i)] = ind.chromosome[i];
  }
  json connections = json::object();
  for (int t = 0; t < cpg::kNumNeurons; ++t) {
    for (int s = 0; s < cpg::kNumNeurons; ++s) {
      const double v = decoded.connectivity.at(t, s);
      if (v != 0.0) {
        connections[cpg::NeuronId::from_index(s).name() + "->" +
                    cpg::NeuronId::from_index(t).name()] = v;
      }
    }
  }
  const json root = {
      {"chromosome", ind.chromosome},
      {"decoded",
       {{"genes", genes},
        {"params",
         {{"tau", decoded.params.tau},
          {"tau_prime", decoded.params.tau_prime},
          {"beta", decoded.params.beta},
          {"w", decoded.params.w_mutual},
          {"u0", decoded.params.u0}}},
        {"connections", connections},
        {"gains", {{"a1", decoded.gains.a1}, {"a2", decoded.gains.a2}}}}},
      {"provenance",
       {{"seed", ind.provenance.seed},
        {"generation", ind.provenance.generation},
        {"config_hash", ind.provenance.config_hash}}},
  };
  return root.dump(2);
}

IndividualFile parse_individual(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("individual is not valid JSON: ") + e.what());
  }
  check_keys(root, {"chromosome", "decoded", "provenance"}, "individual");
  if (!root.contains("chromosome")) throw ValidationError("individual is missing 'chromosome'");

  IndividualFile ind;
  const json& genes = root["chromosome"];
  if (!genes.is_array() || genes.size() != evolution::kNumGenes) {
    throw ValidationError("chromosome must be an array of 25 numbers");
  }
  for (int i = 0; i < evolution::kNumGenes; ++i) ind.chromosome[i] = genes[i].get<double>();

  if (root.contains("provenance")) {
    const json& p = root["provenance"];
    check_keys(p, {"seed", "generation", "config_hash"}, "individual.provenance");
    read_field(p, "seed", ind.provenance.seed);
    read_field(p, "generation", ind.provenance.generation);
    read_field(p, "config_hash", ind.provenance.config_hash);
  }
  return ind;
}

IndividualFile load_individual(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open individual file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_individual(buf.str());
}

std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const coupling::EpisodeResult& result) {
  os << "t,hip_x,hip_y,theta1,theta2,theta3,theta4,theta5,tl,tr,y_LH,y_RH,y_LK,y_RK\n";
  for (const auto& s : result.trajectory.samples) {
    os << format_value(s.t) << ',' << format_value(s.state.hip_x) << ','
       << format_value(s.state.hip_y) << ',' << format_value(s.state.theta1) << ','
       << format_value(s.state.theta2) << ',' << format_value(s.state.theta3) << ','
       << format_value(s.state.theta4) << ',' << format_value(s.state.theta5) << ','
       << (s.state.left_contact ? 1 : 0) << ',' << (s.state.right_contact ? 1 : 0) << ','
       << format_value(s.unit_outputs[0]) << ',' << format_value(s.unit_outputs[1]) << ','
       << format_value(s.unit_outputs[2]) << ',' << format_value(s.unit_outputs[3]) << '\n';
  }
}

std::string trajectory_csv(const coupling::EpisodeResult& result) {
  std::ostringstream oss;
  write_trajectory_csv(oss, result);
  return oss.str();
}

namespace {

struct SvgMapper {
  double cx, cy, scale;  // world center and px per meter
  double px(double x) const { return (x - cx) * scale + 300.0; }
  double py(double y) const { return 300.0 - (y - cy) * scale; }
};

void line(std::ostringstream& os, const SvgMapper& m, mech::Vec2 a, mech::Vec2 b,
          const char* style) {
  os << "  <line x1=\"" << format_value(m.px(a.x)) << "\" y1=\"" << format_value(m.py(a.y))
     << "\" x2=\"" << format_value(m.px(b.x)) << "\" y2=\"" << format_value(m.py(b.y)) << "\" "
     << style << "/>\n";
}

}  // namespace

std::string render_frame_svg(const coupling::TrajectorySample& sample, const mech::Geometry& geom,
                             const mech::GroundProfile& ground) {
  const auto kin = mech::forward_kinematics(sample.state, geom);
  const double view = 4.0 * geom.leg_length();
  const SvgMapper m{kin.hip.x, ground.eval(kin.hip.x) + geom.leg_length() * 0.75, 600.0 / (2.0 * view)};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
        "viewBox=\"0 0 600 600\">\n";
  os << "  <rect width=\"600\" height=\"600\" fill=\"white\"/>\n";

  // ground line sampled across the view
  os << "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
  for (int i = 0; i <= 60; ++i) {
    const double x = kin.hip.x - view + i * (2.0 * view / 60.0);
    os << format_value(m.px(x)) << ',' << format_value(m.py(ground.eval(x))) << ' ';
  }
  os << "\"/>\n";

  const char* left_style = "stroke=\"#999999\" stroke-width=\"3\" stroke-dasharray=\"6,4\"";
  const char* right_style = "stroke=\"black\" stroke-width=\"3\"";
  line(os, m, kin.hip, kin.left_knee, left_style);
  line(os, m, kin.left_knee, kin.left_foot, left_style);
  line(os, m, kin.hip, kin.right_knee, right_style);
  line(os, m, kin.right_knee, kin.right_foot, right_style);

  // Link 1 orientation tick, drawn upward from the hip
  const mech::Vec2 tick = kin.hip + 0.5 * geom.leg_length() *
                                        mech::Vec2{std::sin(sample.state.theta1),
                                                   std::cos(sample.state.theta1)};
  line(os, m, kin.hip, tick, "stroke=\"#777777\" stroke-width=\"2\"");

  os << "  <circle cx=\"" << format_value(m.px(kin.com.x)) << "\" cy=\""
     << format_value(m.py(kin.com.y)) << "\" r=\"4\" fill=\"blue\"/>\n";

  // contact marks below the ground line
  auto mark = [&](mech::Vec2 foot, const char* color) {
    const double gy = ground.eval(foot.x);
    os << "  <rect x=\"" << format_value(m.px(foot.x) - 3.0) << "\" y=\""
       << format_value(m.py(gy) + 8.0) << "\" width=\"6\" height=\"6\" fill=\"" << color
       << "\"/>\n";
  };
  if (sample.state.left_contact) mark(kin.left_foot, "#999999");
  if (sample.state.right_contact) mark(kin.right_foot, "black");

  os << "  <text x=\"10\" y=\"20\" font-size=\"14\" font-family=\"monospace\">t="
     << format_value(sample.t) << "s</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_frames(const std::filesystem::path& dir, const coupling::EpisodeResult& result,
                  const mech::Geometry& geom, const mech::GroundProfile& ground,
                  int frame_stride) {
  std::filesystem::create_directories(dir);
  std::ostringstream index;
  index << "<!DOCTYPE html>\n<html><head><title>gait frames</title></head><body>\n";
  int frame = 0;
  for (std::size_t i = 0; i < result.trajectory.samples.size();
       i += static_cast<std::size_t>(frame_stride)) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d.svg", frame);
    std::ofstream out(dir / name, std::ios::binary);
    out << render_frame_svg(result.trajectory.samples[i], geom, ground);
    index << "<img src=\"" << name << "\" width=\"200\"/>\n";
    ++frame;
  }
  index << "</body></html>\n";
  std::ofstream out(dir / "index.html", std::ios::binary);
  out << index.str();
}

}  // namespace walker::io
