#include "pinnmpc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pinnmpc/csv.hpp"

namespace pinnmpc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// section -> key -> value, with strict consumption tracking.
class IniMap {
public:
    explicit IniMap(const std::string& text) {
        std::stringstream ss(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw std::runtime_error("config line " + std::to_string(lineno) +
                                             ": malformed section header");
                section = trim(t.substr(1, t.size() - 2));
                sections_[section];
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": expected key = value");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (section.empty() && key != "seed")
                throw std::runtime_error("config: key '" + key + "' outside any section");
            sections_[section][key] = value;
        }
    }

    bool has(const std::string& sec, const std::string& key) const {
        auto s = sections_.find(sec);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::string take(const std::string& sec, const std::string& key) {
        consumed_[sec].insert(key);
        return sections_.at(sec).at(key);
    }

    double number(const std::string& sec, const std::string& key, double fallback) {
        if (!has(sec, key)) return fallback;
        return std::stod(take(sec, key));
    }

    std::string text(const std::string& sec, const std::string& key, const std::string& fallback) {
        if (!has(sec, key)) return fallback;
        return take(sec, key);
    }

    std::vector<double> numbers(const std::string& sec, const std::string& key,
                                const std::vector<double>& fallback) {
        if (!has(sec, key)) return fallback;
        std::stringstream ss(take(sec, key));
        std::vector<double> out;
        double v;
        while (ss >> v) out.push_back(v);
        return out;
    }

    void reject_unconsumed() const {
        for (const auto& [sec, keys] : sections_) {
            auto it = consumed_.find(sec);
            for (const auto& [key, value] : keys) {
                (void)value;
                if (it == consumed_.end() || it->second.count(key) == 0)
                    throw std::runtime_error("config: unknown key '" + key + "' in section [" +
                                             sec + "]");
            }
        }
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::map<std::string, std::set<std::string>> consumed_;
};

Vec3 vec3_of(const std::vector<double>& v, const std::string& what) {
    if (v.size() != 3) throw std::runtime_error("config: " + what + " needs 3 values");
    return Vec3(v[0], v[1], v[2]);
}

}  // namespace

ReferenceGenerator RunConfig::trot_reference() const {
    ReferenceGenerator g = ReferenceGenerator::trot();
    g.speed = speed;
    g.height = height;
    g.ori = ori_ref();
    return g;
}

ReferenceGenerator RunConfig::stand_reference() const {
    ReferenceGenerator g = ReferenceGenerator::stand();
    g.height = height;
    g.ori = ori_ref();
    return g;
}

RunConfig RunConfig::from_text(const std::string& text) {
    IniMap ini(text);
    RunConfig c;
    c.raw_text = text;
    c.config_hash = [&] {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(text)));
        return std::string(buf);
    }();

    if (!ini.has("", "seed")) throw std::runtime_error("config: mandatory key 'seed' missing");
    c.seed = static_cast<std::uint64_t>(std::stoull(ini.take("", "seed")));

    // [plant]
    c.plant.m = ini.number("plant", "mass", c.plant.m);
    Vec3 inertia_diag = vec3_of(
        ini.numbers("plant", "inertia_diag",
                    {c.plant.inertia(0, 0), c.plant.inertia(1, 1), c.plant.inertia(2, 2)}),
        "inertia_diag");
    c.plant.inertia = inertia_diag.asDiagonal();
    const double leg_mass = ini.number("plant", "leg_mass", c.plant.leg_masses[0]);
    c.plant.leg_masses = {leg_mass, leg_mass, leg_mass, leg_mass};
    const double hip_x = ini.number("plant", "hip_x", 0.4);
    const double hip_y = ini.number("plant", "hip_y", 0.25);
    c.plant.hip_offsets = {Vec3(hip_x, hip_y, 0), Vec3(hip_x, -hip_y, 0), Vec3(-hip_x, hip_y, 0),
                           Vec3(-hip_x, -hip_y, 0)};
    c.plant.g = ini.number("plant", "g", c.plant.g);
    c.plant.payload_divisor = ini.number("plant", "payload_divisor", c.plant.payload_divisor);
    c.plant.validate();

    // [gait]
    c.gait.period = ini.number("gait", "period", c.gait.period);
    c.gait.duty = ini.number("gait", "duty", c.gait.duty);
    auto offs = ini.numbers("gait", "phase_offsets", {0.0, 0.5, 0.5, 0.0});
    if (offs.size() != 4) throw std::runtime_error("config: phase_offsets needs 4 values");
    for (int i = 0; i < 4; ++i) c.gait.phase_offset[static_cast<std::size_t>(i)] = offs[static_cast<std::size_t>(i)];
    c.gait.nominal_foothold = c.plant.hip_offsets;
    c.gait.validate();

    // [identifier]
    c.ident_gains.W = Mat3(Vec3::Constant(ini.number("identifier", "w", 0.6)).asDiagonal());
    c.ident_gains.V = Mat3(Vec3::Constant(ini.number("identifier", "v", 0.8)).asDiagonal());
    c.ident_gains.K = Mat3(Vec3::Constant(ini.number("identifier", "k", 1.7)).asDiagonal());
    c.ident_gains.e_threshold = ini.number("identifier", "e_threshold", 1e-4);
    c.ident_opts.mass_window_start = ini.number("identifier", "mass_window_start", 1.5);
    c.ident_opts.mass_window_end = ini.number("identifier", "mass_window_end", 2.5);
    c.ident_opts.time_cap = ini.number("identifier", "time_cap", 30.0);
    c.ident_gains.validate();

    // [pinn]
    auto hidden = ini.numbers("pinn", "hidden", {96, 96, 96});
    c.pinn_hidden.clear();
    for (double h : hidden) c.pinn_hidden.push_back(static_cast<int>(h));
    c.train.adam_lr = ini.number("pinn", "adam_lr", 1e-3);
    c.train.adam_epochs = static_cast<int>(ini.number("pinn", "adam_epochs", 5000));
    c.train.batch_size = static_cast<int>(ini.number("pinn", "batch_size", 256));
    c.train.lbfgs_memory = static_cast<int>(ini.number("pinn", "lbfgs_memory", 20));
    c.train.lbfgs_max_iterations = static_cast<int>(ini.number("pinn", "lbfgs_iterations", 200));
    c.train.physics_weight = ini.number("pinn", "physics_weight", 1.0);
    c.train.collocation_count =
        static_cast<std::size_t>(ini.number("pinn", "collocation_count", 2048));
    c.train.validation_fraction = ini.number("pinn", "validation_fraction", 0.1);
    c.t_jitter_lo = ini.number("pinn", "t_jitter_lo", 0.005);
    c.t_jitter_hi = ini.number("pinn", "t_jitter_hi", 0.05);
    c.t_jitter_prob = ini.number("pinn", "t_jitter_prob", 0.5);
    c.train.seed = c.seed;
    c.train.validate();

    // [nmpc]
    c.nmpc = NmpcConfig::quadruped_default();
    c.nmpc.horizon = static_cast<int>(ini.number("nmpc", "horizon", 10));
    c.nmpc.sqp_iterations = static_cast<int>(ini.number("nmpc", "sqp_iterations", 2));
    const double q_pos = ini.number("nmpc", "q_pos", 600);
    const double q_ori = ini.number("nmpc", "q_ori", 500);
    const double q_vel = ini.number("nmpc", "q_vel", 20);
    const double q_angvel = ini.number("nmpc", "q_angvel", 10);
    c.nmpc.q_weights << q_pos, q_pos, ini.number("nmpc", "q_pos_z", q_pos), q_ori, q_ori, q_ori,
        q_vel, q_vel, q_vel, q_angvel, q_angvel, q_angvel;
    c.nmpc.r_weights.setConstant(ini.number("nmpc", "r", 1e-5));
    const double du = ini.number("nmpc", "du_limit", 500.0);
    c.nmpc.du_min.setConstant(-du);
    c.nmpc.du_max.setConstant(du);
    c.nmpc.soft_state_weight = ini.number("nmpc", "soft_state_weight", 1e4);
    c.nmpc.T = ini.number("nmpc", "t_step", 0.01);
    c.nmpc.solver.rho = ini.number("nmpc", "rho", 0.1);
    c.nmpc.solver.tol_primal = ini.number("nmpc", "solver_tol", 1e-6);
    c.nmpc.solver.tol_dual = c.nmpc.solver.tol_primal;
    c.nmpc.solver.max_iterations = static_cast<int>(ini.number("nmpc", "max_admm_iterations", 4000));

    // [pid]
    const double kp_f = ini.number("pid", "kp_force", 200);
    const double kp_t = ini.number("pid", "kp_torque", 80);
    c.pid.kp << kp_f, kp_f, kp_f, kp_t, kp_t, kp_t;
    c.pid.ki.setConstant(ini.number("pid", "ki", 10));
    c.pid.kd.setConstant(ini.number("pid", "kd", 20));
    c.pid.integral_bound = ini.number("pid", "integral_bound", 2.0);
    c.pid.validate();

    // [scenario]
    c.duration = ini.number("scenario", "duration", 10.0);
    c.timestep = ini.number("scenario", "timestep", 0.01);
    c.speed = ini.number("scenario", "speed", 0.2);
    c.height = ini.number("scenario", "height", 0.38);
    c.ori_ref_raw = vec3_of(ini.numbers("scenario", "ori_ref", {-0.05, 2.95, 0.0}), "ori_ref");
    c.ori_ref_order =
        ori_ref_order_from_string(ini.text("scenario", "ori_ref_order", "pitch_yaw_roll"));
    c.payload_mass = ini.number("scenario", "payload_mass", 50.0);
    c.payload_r_p =
        vec3_of(ini.numbers("scenario", "payload_r_p", {0.05, 0.02, 0.03}), "payload_r_p");
    c.controller = ini.text("scenario", "controller", "opi-pinnpc");
    if (c.controller != "opi-pinnpc" && c.controller != "baseline")
        throw std::runtime_error("config: controller must be opi-pinnpc or baseline");
    c.collect_instances =
        static_cast<std::size_t>(ini.number("scenario", "collect_instances", 20));
    c.collect_duration = ini.number("scenario", "collect_duration", 5.0);
    c.mass_lo = ini.number("scenario", "mass_lo", 25.0);
    c.mass_hi = ini.number("scenario", "mass_hi", 100.0);
    c.r_p_bound = ini.number("scenario", "r_p_bound", 0.15);
    c.stagger_span = ini.number("scenario", "stagger_span", 2.5);
    c.benchmark_payloads = ini.numbers("scenario", "benchmark_payloads",
                                       {25.0, 37.5, 50.0, 62.5, 75.0, 87.5, 100.0});
    c.metrics_window_start = ini.number("scenario", "metrics_window_start", 1.0);

    const double f_xy = ini.number("scenario", "force_limit_xy", 600.0);
    const double f_z = ini.number("scenario", "force_limit_z", 2500.0);
    c.bounds.lower = Vec3(-f_xy, -f_xy, 0.0);
    c.bounds.upper = Vec3(f_xy, f_xy, f_z);
    c.nmpc.u_min = c.bounds.lower.replicate(4, 1);
    c.nmpc.u_max = c.bounds.upper.replicate(4, 1);

    c.ident_opts.ori_ref = c.ori_ref();
    c.ident_opts.pos_ref = Vec3(0, 0, c.height);

    ini.reject_unconsumed();
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

std::string RunConfig::default_text(std::uint64_t seed) {
    std::stringstream ss;
    ss << "seed = " << seed << "\n\n"
       << "[plant]\n"
       << "mass = 50\ninertia_diag = 2.5 9 10\nleg_mass = 1\nhip_x = 0.4\nhip_y = 0.25\ng = 9.81\n\n"
       << "[gait]\nperiod = 0.5\nduty = 0.5\nphase_offsets = 0 0.5 0.5 0\n\n"
       << "[identifier]\nw = 0.6\nv = 0.8\nk = 1.7\ne_threshold = 1e-4\n\n"
       << "[pinn]\nhidden = 96 96 96\nadam_lr = 1e-3\nadam_epochs = 5000\nbatch_size = 256\n"
       << "lbfgs_iterations = 200\nphysics_weight = 1\ncollocation_count = 2048\n\n"
       << "[nmpc]\nhorizon = 10\nsqp_iterations = 2\n\n"
       << "[pid]\nkp_force = 200\nkp_torque = 80\nki = 10\nkd = 20\n\n"
       << "[scenario]\nduration = 10\ntimestep = 0.01\nspeed = 0.2\nheight = 0.38\n"
       << "ori_ref = -0.05 2.95 0\nori_ref_order = pitch_yaw_roll\npayload_mass = 50\n";
    return ss.str();
}

std::vector<std::string> RunConfig::echo_lines() const {
    std::vector<std::string> lines;
    lines.push_back("config_hash=" + config_hash);
    lines.push_back("seed=" + std::to_string(seed));
    lines.push_back("config:");
    std::stringstream ss(raw_text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back("  " + line);
    return lines;
}

}  // namespace pinnmpc
