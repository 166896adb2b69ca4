#include "otplan/records_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace otplan {

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return v;
}

namespace {

template <typename Int>
Int parse_int(std::string_view text) {
  Int v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) throw error("missing final newline");
    line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++number_;
    return true;
  }

  std::invalid_argument error(const std::string& what) const {
    return std::invalid_argument("line " + std::to_string(number_) + ": " + what);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::string_view expect_header(LineReader& in, std::string_view key) {
  std::string_view line;
  if (!in.next(line)) throw in.error("truncated header");
  const std::string prefix = "# " + std::string(key) + "=";
  if (line.substr(0, prefix.size()) != prefix) throw in.error("expected '" + prefix + "'");
  return line.substr(prefix.size());
}

void expect_line(LineReader& in, std::string_view want) {
  std::string_view line;
  if (!in.next(line) || line != want) throw in.error("expected '" + std::string(want) + "'");
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

// ---------------------------------------------------------------------------

TrajectoryFile TrajectoryFile::from_record(const RunRecord& record, TrajectoryHeader header) {
  std::map<std::int64_t, const Snapshot*> by_iteration;
  for (const auto& s : record.snapshots) by_iteration[s.iteration] = &s;
  TrajectoryFile file;
  header.robots = record.initial.size();
  file.header = std::move(header);
  for (const auto& [it, snap] : by_iteration)
    for (std::uint32_t i = 0; i < snap->config.size(); ++i)
      file.rows.push_back({it, snap->phase, i, snap->config[i].x, snap->config[i].y});
  return file;
}

std::string TrajectoryFile::serialize() const {
  std::string out;
  out.reserve(64 + rows.size() * 48);
  out += "# otplan trajectory\n";
  out += "# schema=" + std::to_string(header.schema_version) + "\n";
  out += "# robots=" + std::to_string(header.robots) + "\n";
  out += "# shape=" + header.shape_id + "\n";
  out += "# params=" + header.params_hash + "\n";
  out += "# seed=" + std::to_string(header.seed) + "\n";
  out += "iteration,phase,robot,x,y\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iteration);
    out += ',';
    out += to_string(r.phase);
    out += ',';
    out += std::to_string(r.robot);
    out += ',';
    out += format_double(r.x);
    out += ',';
    out += format_double(r.y);
    out += '\n';
  }
  return out;
}

TrajectoryFile TrajectoryFile::parse(std::string_view text) {
  LineReader in(text);
  TrajectoryFile file;
  try {
    expect_line(in, "# otplan trajectory");
    file.header.schema_version = parse_int<int>(expect_header(in, "schema"));
    if (file.header.schema_version != kTrajectorySchema)
      throw in.error("unsupported schema version " + std::to_string(file.header.schema_version));
    file.header.robots = parse_int<std::size_t>(expect_header(in, "robots"));
    file.header.shape_id = std::string(expect_header(in, "shape"));
    file.header.params_hash = std::string(expect_header(in, "params"));
    file.header.seed = parse_int<std::uint64_t>(expect_header(in, "seed"));
    expect_line(in, "iteration,phase,robot,x,y");

    std::string_view line;
    while (in.next(line)) {
      const auto f = split(line, ',');
      if (f.size() != 5) throw in.error("expected 5 fields");
      TrajectoryRow row{parse_int<std::int64_t>(f[0]), phase_from_string(std::string(f[1])),
                        parse_int<std::uint32_t>(f[2]), parse_double(f[3]), parse_double(f[4])};
      if (row.robot >= file.header.robots) throw in.error("robot index out of range");
      if (!file.rows.empty()) {
        const auto& prev = file.rows.back();
        const bool ordered = prev.iteration < row.iteration ||
                             (prev.iteration == row.iteration && prev.robot < row.robot);
        if (!ordered) throw in.error("rows not sorted by (iteration, robot)");
      }
      file.rows.push_back(row);
    }
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    if (what.rfind("line ", 0) == 0) throw;
    throw in.error(what);
  }
  return file;
}

std::vector<std::int64_t> TrajectoryFile::iterations() const {
  std::vector<std::int64_t> out;
  for (const auto& r : rows)
    if (out.empty() || out.back() != r.iteration) out.push_back(r.iteration);
  return out;
}

Configuration TrajectoryFile::configuration_at(std::int64_t iteration) const {
  std::vector<Vec2> pos;
  for (const auto& r : rows)
    if (r.iteration == iteration) pos.push_back({r.x, r.y});
  if (pos.empty()) throw std::out_of_range("iteration " + std::to_string(iteration) + " not recorded");
  return Configuration(std::move(pos));
}

Phase TrajectoryFile::phase_at(std::int64_t iteration) const {
  for (const auto& r : rows)
    if (r.iteration == iteration) return r.phase;
  throw std::out_of_range("iteration " + std::to_string(iteration) + " not recorded");
}

// ---------------------------------------------------------------------------

std::string energy_csv(const RunRecord& record) {
  std::string out = "# otplan energy\n# schema=" + std::to_string(kEnergySchema) +
                    "\niteration,cycle,phase,psi,F,G,objective,min_distance\n";
  for (const auto& r : record.rows) {
    out += std::to_string(r.iteration) + ',' + std::to_string(r.cycle) + ',' + to_string(r.phase);
    for (double v : {r.psi, r.shape_part, r.repel_part, r.objective, r.min_distance}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<RecordRow> parse_energy_csv(std::string_view text) {
  LineReader in(text);
  std::vector<RecordRow> rows;
  try {
    expect_line(in, "# otplan energy");
    if (parse_int<int>(expect_header(in, "schema")) != kEnergySchema)
      throw in.error("unsupported schema version");
    expect_line(in, "iteration,cycle,phase,psi,F,G,objective,min_distance");
    std::string_view line;
    while (in.next(line)) {
      const auto f = split(line, ',');
      if (f.size() != 8) throw in.error("expected 8 fields");
      rows.push_back({parse_int<std::int64_t>(f[0]), parse_int<std::int64_t>(f[1]),
                      phase_from_string(std::string(f[2])), parse_double(f[3]), parse_double(f[4]),
                      parse_double(f[5]), parse_double(f[6]), parse_double(f[7])});
    }
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    if (what.rfind("line ", 0) == 0) throw;
    throw in.error(what);
  }
  return rows;
}

// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace otplan
