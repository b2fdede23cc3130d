#include "aai/featio.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <limits>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "aai/error.hpp"

namespace aai {
namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff),
                                 static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

void put_f32(std::ostream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

// Bytes left in a seekable stream, or nullopt if the stream cannot tell.
std::optional<std::uint64_t> remaining_bytes(std::istream& in) {
  const auto here = in.tellg();
  if (here == std::streampos(-1)) {
    in.clear();
    return std::nullopt;
  }
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(here);
  if (end == std::streampos(-1) || !in) {
    in.clear();
    in.seekg(here);
    return std::nullopt;
  }
  return static_cast<std::uint64_t>(end - here);
}

const std::string& required_string(const nlohmann::json& obj, const char* key,
                                   std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError("manifest line " + std::to_string(line) + ": missing required field '" +
                     key + "'");
  }
  if (!it->is_string()) {
    throw ParseError("manifest line " + std::to_string(line) + ": field '" + key +
                     "' must be a string");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

FeatureTrajectory::FeatureTrajectory(Matrix data, double frame_rate_hz,
                                     std::vector<std::string> channel_names)
    : data_(std::move(data)),
      frame_rate_hz_(frame_rate_hz),
      channel_names_(std::move(channel_names)) {
  if (data_.rows() == 0 || data_.cols() == 0) {
    throw DataError("trajectory must have at least one frame and one channel");
  }
  if (!(frame_rate_hz_ > 0.0) || !std::isfinite(frame_rate_hz_)) {
    throw DataError("trajectory frame rate must be positive and finite");
  }
  if (!channel_names_.empty() && channel_names_.size() != data_.cols()) {
    throw DataError("channel_names has " + std::to_string(channel_names_.size()) +
                    " entries for " + std::to_string(data_.cols()) + " channels");
  }
  for (std::size_t i = 0; i < data_.rows(); ++i) {
    for (std::size_t c = 0; c < data_.cols(); ++c) {
      if (!std::isfinite(data_(i, c))) {
        throw DataError("non-finite value at frame " + std::to_string(i) + ", channel " +
                        std::to_string(c));
      }
    }
  }
}

std::string to_string(SampleRole role) {
  return role == SampleRole::articulatory ? "articulatory" : "feature";
}

SampleRole parse_role(const std::string& text) {
  if (text == "articulatory") return SampleRole::articulatory;
  if (text == "feature") return SampleRole::feature;
  throw ParseError("unknown role '" + text + "' (expected articulatory or feature)");
}

const SampleRecord* Manifest::find(const std::string& id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

void write_trajectory(const FeatureTrajectory& traj, std::ostream& out) {
  const Matrix& m = traj.data();
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
    throw DataError("trajectory too large for AFT1");
  }
  // The constructor guarantees finiteness, but values may overflow float.
  for (double v : m.data()) {
    if (!std::isfinite(static_cast<float>(v))) {
      throw DataError("value " + std::to_string(v) + " is not representable as f32");
    }
  }
  out.write(kAft1Magic, 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  put_f32(out, static_cast<float>(traj.frame_rate_hz()));
  for (double v : m.data()) put_f32(out, static_cast<float>(v));
  if (!out) throw DataError("I/O failure while writing trajectory");
}

FeatureTrajectory read_trajectory(std::istream& in) {
  std::array<unsigned char, kAft1HeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != static_cast<std::streamsize>(header.size())) {
    throw ParseError("truncated AFT1 header");
  }
  if (std::memcmp(header.data(), kAft1Magic, 4) != 0) {
    throw ParseError("bad magic: expected AFT1");
  }
  const std::uint32_t frames = get_u32(header.data() + 4);
  const std::uint32_t channels = get_u32(header.data() + 8);
  const float rate = get_f32(header.data() + 12);
  if (frames == 0 || channels == 0) {
    throw ParseError("AFT1 header declares zero frames or channels");
  }
  if (!(rate > 0.0f) || !std::isfinite(rate)) {
    throw ParseError("AFT1 header declares invalid frame rate");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(frames) * channels;
  const std::uint64_t payload = count * 4;
  if (auto left = remaining_bytes(in); left && *left < payload) {
    throw ParseError("truncated AFT1 payload: header declares " + std::to_string(frames) + "x" +
                     std::to_string(channels) + " but only " + std::to_string(*left / 4) +
                     " values present");
  }

  // Chunked read so a lying header on a non-seekable stream cannot force a
  // huge up-front allocation.
  std::vector<double> values;
  constexpr std::uint64_t kChunk = 1 << 16;
  std::vector<unsigned char> buf;
  std::uint64_t done = 0;
  while (done < count) {
    const std::uint64_t n = std::min(kChunk, count - done);
    buf.resize(n * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 4));
    if (static_cast<std::uint64_t>(in.gcount()) != n * 4) {
      throw ParseError("truncated AFT1 payload: header declares " + std::to_string(count) +
                       " values but only " +
                       std::to_string(done + static_cast<std::uint64_t>(in.gcount()) / 4) +
                       " present");
    }
    for (std::uint64_t k = 0; k < n; ++k) {
      const float v = get_f32(buf.data() + 4 * k);
      if (!std::isfinite(v)) {
        const std::uint64_t flat = done + k;
        throw DataError("non-finite value at frame " + std::to_string(flat / channels) +
                        ", channel " + std::to_string(flat % channels));
      }
      values.push_back(v);
    }
    done += n;
  }
  return FeatureTrajectory(Matrix(frames, channels, std::move(values)), rate);
}

void write_trajectory_file(const FeatureTrajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_trajectory(traj, out);
}

FeatureTrajectory read_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_trajectory(in);
}

Manifest load_manifest(std::istream& in) {
  Manifest manifest;
  std::map<std::string, std::size_t> id_line;
  std::map<std::string, SampleRole> set_role;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("manifest line " + std::to_string(line) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw ParseError("manifest line " + std::to_string(line) + ": expected a JSON object");
    }
    SampleRecord r;
    r.id = required_string(obj, "id", line);
    r.speaker = required_string(obj, "speaker", line);
    r.word = required_string(obj, "word", line);
    r.label = required_string(obj, "label", line);
    r.set_id = required_string(obj, "set_id", line);
    r.path = required_string(obj, "path", line);
    try {
      r.role = parse_role(required_string(obj, "role", line));
    } catch (const ParseError& e) {
      throw ParseError("manifest line " + std::to_string(line) + ": " + e.what());
    }

    if (auto [it, inserted] = id_line.emplace(r.id, line); !inserted) {
      throw ParseError("manifest line " + std::to_string(line) + ": duplicate id '" + r.id +
                       "' (first seen on line " + std::to_string(it->second) + ")");
    }
    if (auto [it, inserted] = set_role.emplace(r.set_id, r.role);
        !inserted && it->second != r.role) {
      throw ParseError("manifest line " + std::to_string(line) + ": set '" + r.set_id +
                       "' mixes roles");
    }
    manifest.records.push_back(std::move(r));
  }
  return manifest;
}

Manifest load_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  Manifest m = load_manifest(in);
  m.base_dir = path.parent_path();
  return m;
}

void write_manifest(const Manifest& manifest, std::ostream& out) {
  for (const auto& r : manifest.records) {
    nlohmann::ordered_json obj;
    obj["id"] = r.id;
    obj["speaker"] = r.speaker;
    obj["word"] = r.word;
    obj["label"] = r.label;
    obj["set_id"] = r.set_id;
    obj["path"] = r.path;
    obj["role"] = to_string(r.role);
    out << obj.dump() << '\n';
  }
}

TrajectoryMap load_trajectories(const Manifest& manifest) {
  TrajectoryMap out;
  for (const auto& r : manifest.records) {
    std::filesystem::path p(r.path);
    if (p.is_relative() && !manifest.base_dir.empty()) p = manifest.base_dir / p;
    try {
      out.emplace(r.id, read_trajectory_file(p));
    } catch (const Error& e) {
      throw DataError("sample '" + r.id + "': " + e.what());
    }
  }
  return out;
}

}  // namespace aai
