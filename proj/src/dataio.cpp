#include "gait/dataio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gait {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Identities

WalkerIdentity gen_identity(Rng& rng) {
    using R = WalkerRanges;
    WalkerIdentity w;
    w.femur = rng.uniform(R::femur[0], R::femur[1]);
    w.tibia = rng.uniform(R::tibia[0], R::tibia[1]);
    w.humerus = rng.uniform(R::humerus[0], R::humerus[1]);
    w.forearm = rng.uniform(R::forearm[0], R::forearm[1]);
    w.torso = rng.uniform(R::torso[0], R::torso[1]);
    w.body_width = rng.uniform(R::body_width[0], R::body_width[1]);
    w.head_radius = rng.uniform(R::head_radius[0], R::head_radius[1]);
    w.period = R::period[0] + rng.below(R::period[1] - R::period[0] + 1);
    w.amplitude = rng.uniform(R::amplitude[0], R::amplitude[1]);
    w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return w;
}

double identity_separation(const WalkerIdentity& a, const WalkerIdentity& b) {
    using R = WalkerRanges;
    auto d = [](double x, double y, const double (&r)[2]) { return std::abs(x - y) / (r[1] - r[0]); };
    double s = 0.0;
    s = std::max(s, d(a.femur, b.femur, R::femur));
    s = std::max(s, d(a.tibia, b.tibia, R::tibia));
    s = std::max(s, d(a.humerus, b.humerus, R::humerus));
    s = std::max(s, d(a.forearm, b.forearm, R::forearm));
    s = std::max(s, d(a.torso, b.torso, R::torso));
    s = std::max(s, d(a.body_width, b.body_width, R::body_width));
    s = std::max(s, d(a.head_radius, b.head_radius, R::head_radius));
    s = std::max(s, d(a.amplitude, b.amplitude, R::amplitude));
    const double period_span = static_cast<double>(R::period[1] - R::period[0]);
    s = std::max(s, std::abs(static_cast<double>(a.period) - static_cast<double>(b.period)) / period_span);
    return s;
}

std::vector<WalkerIdentity> gen_identities(std::size_t count, Rng& rng, double min_separation) {
    constexpr std::size_t kMaxTries = 100000;
    std::vector<WalkerIdentity> out;
    std::size_t tries = 0;
    while (out.size() < count) {
        if (++tries > kMaxTries) {
            throw std::runtime_error("gen_identities: cannot place " + std::to_string(count) +
                                     " identities at separation " + std::to_string(min_separation));
        }
        WalkerIdentity w = gen_identity(rng);
        bool ok = std::all_of(out.begin(), out.end(),
                              [&](const WalkerIdentity& o) { return identity_separation(w, o) >= min_separation; });
        if (ok) out.push_back(w);
    }
    return out;
}

std::vector<int> casia_views() {
    std::vector<int> v;
    for (int a = 0; a <= 180; a += 18) v.push_back(a);
    return v;
}

std::vector<int> oumvlp_views() {
    std::vector<int> v;
    for (int a = 0; a <= 90; a += 15) v.push_back(a);
    for (int a = 180; a <= 270; a += 15) v.push_back(a);
    return v;
}

// ---------------------------------------------------------------------------
// Articulation and rasterization

namespace {

struct Vec3 {
    double x = 0, y = 0, z = 0;  // forward, up, lateral (left = +z)
};

Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }

struct Body {
    std::array<Vec3, kJoints> joints;
    Vec3 hip_center, shoulder_center, head_center;
};

// Limb pointing down, rotated forward by `angle` in the sagittal plane.
Vec3 limb(double length, double angle) { return {length * std::sin(angle), -length * std::cos(angle), 0.0}; }

Body articulate(const WalkerIdentity& w, double phi, double amplitude) {
    Body b;
    const double leg = w.femur + w.tibia;
    const double hip_y = leg * (0.97 + 0.03 * std::cos(2.0 * phi));
    const double hip_half = 0.35 * w.body_width;
    const double shoulder_half = 0.5 * w.body_width;
    b.hip_center = {0.0, hip_y, 0.0};
    b.shoulder_center = {0.0, hip_y + w.torso, 0.0};

    for (int side = 0; side < 2; ++side) {
        const double s = side == 0 ? 1.0 : -1.0;  // left, right
        const double phase = phi + (side == 0 ? 0.0 : std::numbers::pi);
        const double thigh = amplitude * std::sin(phase);
        const double knee_flex = 0.55 * amplitude * (1.0 + std::sin(phase + 1.2));
        const Vec3 hip{0.0, hip_y, s * hip_half};
        const Vec3 knee = hip + limb(w.femur, thigh);
        const Vec3 ankle = knee + limb(w.tibia, thigh - knee_flex);
        const double arm = -0.6 * amplitude * std::sin(phase);
        const Vec3 shoulder{0.0, hip_y + w.torso, s * shoulder_half};
        const Vec3 elbow = shoulder + limb(w.humerus, arm);
        const Vec3 wrist = elbow + limb(w.forearm, arm + 0.35);
        b.joints[side == 0 ? kLeftHip : kRightHip] = hip;
        b.joints[side == 0 ? kLeftKnee : kRightKnee] = knee;
        b.joints[side == 0 ? kLeftAnkle : kRightAnkle] = ankle;
        b.joints[side == 0 ? kLeftShoulder : kRightShoulder] = shoulder;
        b.joints[side == 0 ? kLeftElbow : kRightElbow] = elbow;
        b.joints[side == 0 ? kLeftWrist : kRightWrist] = wrist;
    }
    const double r = w.head_radius;
    b.head_center = {0.015, hip_y + w.torso + 0.05 + r, 0.0};
    b.joints[kNose] = b.head_center + Vec3{0.9 * r, -0.1 * r, 0.0};
    b.joints[kLeftEye] = b.head_center + Vec3{0.75 * r, 0.25 * r, 0.35 * r};
    b.joints[kRightEye] = b.head_center + Vec3{0.75 * r, 0.25 * r, -0.35 * r};
    b.joints[kLeftEar] = b.head_center + Vec3{0.0, 0.1 * r, 0.95 * r};
    b.joints[kRightEar] = b.head_center + Vec3{0.0, 0.1 * r, -0.95 * r};
    return b;
}

struct Px {
    double col = 0, row = 0;
};

struct Camera {
    double sin_v = 0, cos_v = 1;
    double scale = 50, center_col = 22, ground_row = 60, offset_row = 0;

    Px project(const Vec3& p) const {
        const double u = p.x * sin_v + p.z * cos_v;
        return {center_col + u * scale, ground_row - p.y * scale + offset_row};
    }
};

class Canvas {
public:
    Canvas(std::size_t h, std::size_t w, std::uint8_t* pixels) : h_(h), w_(w), px_(pixels) {}

    template <class Inside>
    void fill(double col_lo, double col_hi, double row_lo, double row_hi, Inside inside) {
        const auto c0 = static_cast<long>(std::max(0.0, std::floor(col_lo)));
        const auto c1 = static_cast<long>(std::min(static_cast<double>(w_) - 1, std::ceil(col_hi)));
        const auto r0 = static_cast<long>(std::max(0.0, std::floor(row_lo)));
        const auto r1 = static_cast<long>(std::min(static_cast<double>(h_) - 1, std::ceil(row_hi)));
        for (long r = r0; r <= r1; ++r)
            for (long c = c0; c <= c1; ++c)
                if (inside(c + 0.5, r + 0.5)) px_[static_cast<std::size_t>(r) * w_ + static_cast<std::size_t>(c)] = 255;
    }

    void capsule(Px a, Px b, double radius) {
        const double dx = b.col - a.col, dy = b.row - a.row;
        const double len2 = dx * dx + dy * dy;
        fill(std::min(a.col, b.col) - radius, std::max(a.col, b.col) + radius, std::min(a.row, b.row) - radius,
             std::max(a.row, b.row) + radius, [&](double x, double y) {
                 double t = len2 > 0 ? ((x - a.col) * dx + (y - a.row) * dy) / len2 : 0.0;
                 t = std::clamp(t, 0.0, 1.0);
                 const double ex = x - (a.col + t * dx), ey = y - (a.row + t * dy);
                 return ex * ex + ey * ey <= radius * radius;
             });
    }

    void ellipse(Px c, double rx, double ry) {
        fill(c.col - rx, c.col + rx, c.row - ry, c.row + ry, [&](double x, double y) {
            const double ex = (x - c.col) / rx, ey = (y - c.row) / ry;
            return ex * ex + ey * ey <= 1.0;
        });
    }

private:
    std::size_t h_, w_;
    std::uint8_t* px_;
};

void draw_body(Canvas& canvas, const Body& b, const WalkerIdentity& w, const Camera& cam, Condition cond) {
    const double s = cam.scale;
    auto P = [&](const Vec3& v) { return cam.project(v); };
    const auto& j = b.joints;
    const bool coat = cond == Condition::CL;

    double torso_r = std::abs(0.5 * w.body_width * cam.cos_v) + 0.055;
    if (coat) torso_r = 1.3 * torso_r + 0.01;
    const double thigh_r = (coat ? 1.8 : 1.0) * 0.05;

    canvas.capsule(P(b.hip_center), P(b.shoulder_center), torso_r * s);
    canvas.capsule(P(j[kLeftHip]), P(j[kRightHip]), 0.05 * s);
    canvas.capsule(P(b.shoulder_center), P(b.head_center), 0.03 * s);
    canvas.ellipse(P(b.head_center), w.head_radius * s, w.head_radius * s);
    for (auto [hip, knee, ankle] : {std::array{kLeftHip, kLeftKnee, kLeftAnkle}, std::array{kRightHip, kRightKnee, kRightAnkle}}) {
        canvas.capsule(P(j[hip]), P(j[knee]), thigh_r * s);
        canvas.capsule(P(j[knee]), P(j[ankle]), 0.038 * s);
    }
    for (auto [sh, el, wr] : {std::array{kLeftShoulder, kLeftElbow, kLeftWrist},
                              std::array{kRightShoulder, kRightElbow, kRightWrist}}) {
        canvas.capsule(P(j[sh]), P(j[el]), 0.032 * s);
        canvas.capsule(P(j[el]), P(j[wr]), 0.027 * s);
    }
    if (coat) {
        const Vec3 hem{0.0, b.hip_center.y - 0.55 * w.femur, 0.0};
        canvas.capsule(P(b.hip_center), P(hem), torso_r * s);
    }
    if (cond == Condition::BG) {
        canvas.ellipse(P(j[kRightWrist] + Vec3{0.0, -0.06, 0.0}), 0.075 * s, 0.10 * s);
    }
}

}  // namespace

GaitSample render_sequence(const WalkerIdentity& id, int view, Condition condition, std::size_t frames, Rng& rng,
                           const RenderOptions& opts) {
    if (view < 0 || view >= 360) throw std::invalid_argument("render_sequence: view " + std::to_string(view) + " outside [0, 360)");
    if (frames == 0) throw std::invalid_argument("render_sequence: need at least one frame");
    const std::size_t start = rng.below(id.period);
    const double offset_row = static_cast<double>(rng.below(3)) - 1.0;
    const double amplitude = id.amplitude * rng.uniform(0.95, 1.05);

    Camera cam;
    const double v = view * std::numbers::pi / 180.0;
    cam.sin_v = std::sin(v);
    cam.cos_v = std::cos(v);
    cam.scale = static_cast<double>(opts.height) * 50.0 / 64.0;
    cam.center_col = static_cast<double>(opts.width) / 2.0;
    cam.ground_row = static_cast<double>(opts.height) * 60.0 / 64.0;
    cam.offset_row = offset_row;

    GaitSample out;
    auto& sil = out.silhouettes;
    sil.frames = frames;
    sil.height = opts.height;
    sil.width = opts.width;
    sil.pixels.assign(frames * opts.height * opts.width, 0);
    out.keypoints.frames.resize(frames);

    for (std::size_t t = 0; t < frames; ++t) {
        // phase depends on t only through (t + start) mod period, so frames repeat exactly
        const std::size_t k = (t + start) % id.period;
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(id.period) + id.phase;
        const Body body = articulate(id, phi, amplitude);
        Canvas canvas(opts.height, opts.width, sil.frame(t));
        draw_body(canvas, body, id, cam, condition);
        auto& kp = out.keypoints.frames[t];
        for (std::size_t j = 0; j < kJoints; ++j) {
            const Px p = cam.project(body.joints[j]);
            kp[3 * j] = p.col;
            kp[3 * j + 1] = p.row;
            kp[3 * j + 2] = 1.0;
        }
    }
    if (opts.keypoint_jitter > 0.0) {
        for (auto& kp : out.keypoints.frames)
            for (std::size_t j = 0; j < kJoints; ++j) {
                kp[3 * j] = std::clamp(kp[3 * j] + opts.keypoint_jitter * rng.normal(), 0.0,
                                       static_cast<double>(opts.width) - 1e-9);
                kp[3 * j + 1] = std::clamp(kp[3 * j + 1] + opts.keypoint_jitter * rng.normal(), 0.0,
                                           static_cast<double>(opts.height) - 1e-9);
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Datasets

void DatasetSpec::validate() const {
    if (identities == 0) throw std::invalid_argument("dataset: need at least one identity");
    if (views.empty()) throw std::invalid_argument("dataset: view list is empty");
    std::set<int> seen;
    for (int v : views) {
        if (v < 0 || v >= 360) throw std::invalid_argument("dataset: view " + std::to_string(v) + " outside [0, 360)");
        if (!seen.insert(v).second) throw std::invalid_argument("dataset: duplicate view " + std::to_string(v));
    }
    if (conditions.empty()) throw std::invalid_argument("dataset: condition list is empty");
    if (seqs_per_cell == 0 || seqs_per_cell > 99) throw std::invalid_argument("dataset: sequences per cell must be 1..99");
    if (frames == 0 || frames > 9999) throw std::invalid_argument("dataset: frame count must be 1..9999");
    if (identities > 999) throw std::invalid_argument("dataset: at most 999 identities");
    if (render.height < 16 || render.width < 16) throw std::invalid_argument("dataset: frames must be at least 16x16");
    if (render.keypoint_jitter < 0.0) throw std::invalid_argument("dataset: keypoint jitter must be >= 0");
}

std::vector<const GaitSample*> Dataset::select(const std::vector<std::string>& selectors) const {
    std::set<std::pair<Condition, int>> wanted;
    for (const auto& s : selectors) {
        const auto dash = s.find('-');
        if (dash == std::string::npos) throw std::invalid_argument("bad sequence selector '" + s + "' (want e.g. nm-01)");
        wanted.insert({parse_condition(s.substr(0, dash)), std::stoi(s.substr(dash + 1))});
    }
    std::vector<const GaitSample*> out;
    for (const auto& sample : samples)
        if (wanted.count({sample.info().condition, sample.info().seq_num})) out.push_back(&sample);
    return out;
}

Dataset generate_dataset(const DatasetSpec& spec) {
    spec.validate();
    Dataset ds;
    ds.spec = spec;
    Rng id_rng = Rng::stream(spec.seed, "data/identities");
    ds.walkers = gen_identities(spec.identities, id_rng);
    for (std::size_t i = 0; i < spec.identities; ++i) {
        for (Condition c : spec.conditions) {
            for (std::size_t s = 1; s <= spec.seqs_per_cell; ++s) {
                for (int v : spec.views) {
                    SequenceInfo info{static_cast<int>(i + 1), c, static_cast<int>(s), v};
                    Rng rng = Rng::stream(spec.seed, "data/" + info.id());
                    GaitSample sample = render_sequence(ds.walkers[i], v, c, spec.frames, rng, spec.render);
                    sample.silhouettes.info = info;
                    ds.samples.push_back(std::move(sample));
                }
            }
        }
    }
    std::sort(ds.samples.begin(), ds.samples.end(),
              [](const GaitSample& a, const GaitSample& b) { return a.info().id() < b.info().id(); });
    return ds;
}

namespace {

std::string pad_int(long v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*ld", width, v);
    return buf;
}

fs::path sequence_dir(const fs::path& root, const SequenceInfo& info) {
    return root / pad_int(info.identity, 3) / (condition_name(info.condition) + "-" + pad_int(info.seq_num, 2)) /
           pad_int(info.view, 3);
}

std::string frame_name(std::size_t t) { return pad_int(static_cast<long>(t), 4) + ".pgm"; }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_views(const std::vector<int>& views) {
    std::string s;
    for (std::size_t i = 0; i < views.size(); ++i) s += (i ? "," : "") + std::to_string(views[i]);
    return s;
}

std::string join_conditions(const std::vector<Condition>& cs) {
    std::string s;
    for (std::size_t i = 0; i < cs.size(); ++i) s += (i ? "," : "") + condition_name(cs[i]);
    return s;
}

}  // namespace

void write_pgm(const fs::path& path, std::size_t height, std::size_t width, const std::uint8_t* pixels) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "P5\n" << width << ' ' << height << "\n255\n";
    os.write(reinterpret_cast<const char*>(pixels), static_cast<std::streamsize>(height * width));
    if (!os) throw std::runtime_error("short write to " + path.string());
}

std::vector<std::uint8_t> read_pgm(const fs::path& path, std::size_t& height, std::size_t& width) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open frame " + path.string());
    auto token = [&]() {
        std::string tok;
        char c;
        while (is.get(c)) {
            if (c == '#') {
                std::string comment;
                std::getline(is, comment);
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                if (!tok.empty()) break;
            } else {
                tok += c;
            }
        }
        return tok;
    };
    if (token() != "P5") throw std::runtime_error("not a binary PGM: " + path.string());
    try {
        width = std::stoul(token());
        height = std::stoul(token());
        if (std::stoul(token()) != 255) throw std::runtime_error("unsupported PGM depth");
    } catch (const std::exception&) {
        throw std::runtime_error("unreadable PGM header in " + path.string());
    }
    std::vector<std::uint8_t> px(height * width);
    if (!is.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()))) {
        throw std::runtime_error("truncated PGM " + path.string());
    }
    return px;
}

void write_keypoints(const fs::path& path, const KeypointSequence& k) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    for (const auto& frame : k.frames) {
        for (std::size_t i = 0; i < frame.size(); ++i) os << (i ? "," : "") << format_double(frame[i]);
        os << '\n';
    }
}

KeypointSequence read_keypoints(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("missing keypoint sidecar " + path.string());
    KeypointSequence k;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::array<double, kKeypointValues> frame{};
        std::istringstream ls(line);
        std::string field;
        std::size_t n = 0;
        while (std::getline(ls, field, ',')) {
            if (n >= kKeypointValues) break;
            try {
                frame[n++] = std::stod(field);
            } catch (const std::exception&) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
            }
        }
        if (n != kKeypointValues || std::getline(ls, field, ',')) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 51 values");
        }
        k.frames.push_back(frame);
    }
    return k;
}

void write_dataset(const fs::path& root, const Dataset& dataset) {
    fs::create_directories(root);
    for (const auto& sample : dataset.samples) {
        const fs::path dir = sequence_dir(root, sample.info());
        fs::path staging = dir;
        staging += ".tmp";
        fs::remove_all(staging);
        fs::create_directories(staging);
        const auto& sil = sample.silhouettes;
        for (std::size_t t = 0; t < sil.frames; ++t) write_pgm(staging / frame_name(t), sil.height, sil.width, sil.frame(t));
        write_keypoints(staging / "keypoints.txt", sample.keypoints);
        fs::remove_all(dir);
        fs::rename(staging, dir);
    }
    const auto& spec = dataset.spec;
    std::ostringstream m;
    m << "format = gaittake-synthetic 1\n"
      << "seed = " << spec.seed << '\n'
      << "identities = " << spec.identities << '\n'
      << "views = " << join_views(spec.views) << '\n'
      << "conditions = " << join_conditions(spec.conditions) << '\n'
      << "seqs_per_cell = " << spec.seqs_per_cell << '\n'
      << "frames = " << spec.frames << '\n'
      << "height = " << spec.render.height << '\n'
      << "width = " << spec.render.width << '\n'
      << "keypoint_jitter = " << format_double(spec.render.keypoint_jitter) << '\n'
      << "sequences = " << dataset.samples.size() << '\n';
    for (std::size_t i = 0; i < dataset.walkers.size(); ++i) {
        const auto& w = dataset.walkers[i];
        m << "walker." << pad_int(static_cast<long>(i + 1), 3) << " = femur " << format_double(w.femur) << " tibia "
          << format_double(w.tibia) << " humerus " << format_double(w.humerus) << " forearm "
          << format_double(w.forearm) << " torso " << format_double(w.torso) << " body_width "
          << format_double(w.body_width) << " head_radius " << format_double(w.head_radius) << " period " << w.period
          << " amplitude " << format_double(w.amplitude) << " phase " << format_double(w.phase) << '\n';
    }
    std::ofstream os(root / "manifest.txt", std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + (root / "manifest.txt").string());
    os << m.str();
}

Dataset load_dataset(const fs::path& root, bool strict, LoadReport* report) {
    if (!fs::is_directory(root)) throw std::runtime_error("dataset root " + root.string() + " is not a directory");
    Dataset ds;
    std::map<std::string, std::string> manifest;
    if (std::ifstream mf(root / "manifest.txt"); mf) {
        std::string line;
        while (std::getline(mf, line)) {
            const auto eq = line.find(" = ");
            if (eq != std::string::npos) manifest[line.substr(0, eq)] = line.substr(eq + 3);
        }
    }
    auto note = [&](const std::string& problem) {
        if (strict) throw std::runtime_error(problem);
        if (report) report->problems.push_back(problem);
    };
    auto numeric = [](const std::string& s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    };
    std::vector<fs::path> id_dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && numeric(e.path().filename().string())) id_dirs.push_back(e.path());
    std::sort(id_dirs.begin(), id_dirs.end());
    std::set<int> views, identities;
    std::set<Condition> conditions;
    std::size_t max_seq = 0;
    for (const auto& id_dir : id_dirs) {
        std::vector<fs::path> cond_dirs;
        for (const auto& e : fs::directory_iterator(id_dir))
            if (e.is_directory()) cond_dirs.push_back(e.path());
        std::sort(cond_dirs.begin(), cond_dirs.end());
        for (const auto& cond_dir : cond_dirs) {
            const std::string name = cond_dir.filename().string();
            const auto dash = name.find('-');
            SequenceInfo base;
            try {
                if (dash == std::string::npos) throw std::invalid_argument("no dash");
                base.condition = parse_condition(name.substr(0, dash));
                base.seq_num = std::stoi(name.substr(dash + 1));
            } catch (const std::exception&) {
                note("unrecognized condition directory " + cond_dir.string());
                continue;
            }
            base.identity = std::stoi(id_dir.filename().string());
            std::vector<fs::path> view_dirs;
            for (const auto& e : fs::directory_iterator(cond_dir))
                if (e.is_directory() && numeric(e.path().filename().string())) view_dirs.push_back(e.path());
            std::sort(view_dirs.begin(), view_dirs.end());
            for (const auto& view_dir : view_dirs) {
                SequenceInfo info = base;
                info.view = std::stoi(view_dir.filename().string());
                try {
                    GaitSample sample;
                    auto& sil = sample.silhouettes;
                    sil.info = info;
                    std::vector<fs::path> frames;
                    for (const auto& e : fs::directory_iterator(view_dir))
                        if (e.path().extension() == ".pgm") frames.push_back(e.path());
                    std::sort(frames.begin(), frames.end());
                    if (frames.empty()) throw std::runtime_error("no frames in " + view_dir.string());
                    for (const auto& f : frames) {
                        std::size_t h = 0, w = 0;
                        auto px = read_pgm(f, h, w);
                        if (sil.frames == 0) {
                            sil.height = h, sil.width = w;
                        } else if (h != sil.height || w != sil.width) {
                            throw std::runtime_error("frame size differs in " + f.string());
                        }
                        sil.pixels.insert(sil.pixels.end(), px.begin(), px.end());
                        ++sil.frames;
                    }
                    const fs::path sidecar = view_dir / "keypoints.txt";
                    if (!fs::exists(sidecar)) throw std::runtime_error("missing keypoint sidecar " + sidecar.string());
                    sample.keypoints = read_keypoints(sidecar);
                    if (sample.keypoints.size() != sil.frames) {
                        throw std::runtime_error("keypoint sidecar " + sidecar.string() + " has " +
                                                 std::to_string(sample.keypoints.size()) + " frames, silhouettes have " +
                                                 std::to_string(sil.frames));
                    }
                    ds.samples.push_back(std::move(sample));
                    views.insert(info.view);
                    identities.insert(info.identity);
                    conditions.insert(info.condition);
                    max_seq = std::max<std::size_t>(max_seq, static_cast<std::size_t>(info.seq_num));
                } catch (const std::exception& e) {
                    note(e.what());
                }
            }
        }
    }
    std::sort(ds.samples.begin(), ds.samples.end(),
              [](const GaitSample& a, const GaitSample& b) { return a.info().id() < b.info().id(); });
    ds.spec.identities = identities.size();
    ds.spec.views.assign(views.begin(), views.end());
    ds.spec.conditions.assign(conditions.begin(), conditions.end());
    ds.spec.seqs_per_cell = max_seq;
    if (!ds.samples.empty()) {
        ds.spec.frames = ds.samples.front().silhouettes.frames;
        ds.spec.render.height = ds.samples.front().silhouettes.height;
        ds.spec.render.width = ds.samples.front().silhouettes.width;
    }
    if (auto it = manifest.find("seed"); it != manifest.end()) ds.spec.seed = std::stoull(it->second);
    return ds;
}

}  // namespace gait
