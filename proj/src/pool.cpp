#include "mlmc_seis/pool.hpp"

#include <fstream>
#include <iterator>
#include <json.hpp>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

using nlohmann::json;

std::string sample_to_json(const CorrectionSample& s) {
  json j;
  j["qoi_kind"] = s.qoi_kind;
  j["run"] = s.run;
  j["level"] = s.level;
  j["index"] = s.index;
  j["seed"] = s.seed;
  j["fine"] = s.fine;
  j["coarse"] = s.coarse ? json(*s.coarse) : json(nullptr);
  j["work_s"] = s.work_s;
  j["fine_work_s"] = s.fine_work_s;
  j["timestamp"] = s.timestamp;
  return j.dump();
}

CorrectionSample sample_from_json(const std::string& line) {
  const auto j = json::parse(line);
  CorrectionSample s;
  s.qoi_kind = j.at("qoi_kind").get<std::string>();
  s.run = j.at("run").get<std::uint64_t>();
  s.level = j.at("level").get<int>();
  s.index = j.at("index").get<std::uint64_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.fine = j.at("fine").get<double>();
  if (!j.at("coarse").is_null()) s.coarse = j.at("coarse").get<double>();
  s.work_s = j.at("work_s").get<double>();
  s.fine_work_s = j.value("fine_work_s", s.work_s);
  s.timestamp = j.value("timestamp", std::string());
  return s;
}

namespace {

json provenance_json(const PoolProvenance& p) {
  return json{{"provenance", {{"qoi_kind", p.qoi_kind}, {"model_id", p.model_id}, {"config_digest", p.config_digest}}}};
}

}  // namespace

namespace {

// Parses a pool file; `intact_bytes` receives the length of the prefix made
// of complete, newline-terminated records.
SamplePool parse_pool(const std::filesystem::path& path, std::uintmax_t* intact_bytes);

}  // namespace

SamplePool SamplePool::load(const std::filesystem::path& path) { return parse_pool(path, nullptr); }

namespace {

SamplePool parse_pool(const std::filesystem::path& path, std::uintmax_t* intact_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("missing pool file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  SamplePool pool;
  PoolProvenance prov;
  std::vector<CorrectionSample> records;
  std::uintmax_t good = 0;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // torn final line
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) {
      good = pos;
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      break;
    }
    if (first && j.contains("provenance")) {
      const auto& p = j["provenance"];
      prov = {p.at("qoi_kind").get<std::string>(), p.at("model_id").get<std::string>(),
              p.at("config_digest").get<std::string>()};
    } else {
      records.push_back(sample_from_json(line));
    }
    first = false;
    good = pos;
  }
  pool = SamplePool(prov);
  pool.append_batch(records);
  if (intact_bytes) *intact_bytes = good;
  return pool;
}

}  // namespace

SamplePool SamplePool::open(const std::filesystem::path& path, const PoolProvenance& provenance) {
  SamplePool pool(provenance);
  if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
    std::uintmax_t intact = 0;
    pool = parse_pool(path, &intact);
    if (!(pool.provenance_ == provenance))
      throw ConfigError("pool " + path.string() + " belongs to a different configuration");
    // Drop a torn tail left by an interrupted writer.
    if (std::filesystem::file_size(path) != intact) std::filesystem::resize_file(path, intact);
  } else {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot create pool file " + path.string());
    out << provenance_json(provenance).dump() << '\n';
  }
  pool.path_ = path;
  return pool;
}

void SamplePool::write_line(const std::string& line) {
  if (!path_) return;
  std::ofstream out(*path_, std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) throw ConfigError("failed to append to pool " + path_->string());
}

void SamplePool::append(const CorrectionSample& s) {
  auto& level = samples_[s.level];
  const auto key = std::make_pair(s.run, s.index);
  if (level.count(key)) throw ConfigError("pool: duplicate sample index");
  level.emplace(key, s);
  ++count_;
  write_line(sample_to_json(s));
}

void SamplePool::append_batch(const std::vector<CorrectionSample>& batch) {
  for (const auto& s : batch) append(s);
}

bool SamplePool::contains(std::uint64_t run, int level, std::uint64_t index) const {
  return find(run, level, index) != nullptr;
}

const CorrectionSample* SamplePool::find(std::uint64_t run, int level, std::uint64_t index) const {
  const auto it = samples_.find(level);
  if (it == samples_.end()) return nullptr;
  const auto jt = it->second.find({run, index});
  return jt == it->second.end() ? nullptr : &jt->second;
}

std::vector<const CorrectionSample*> SamplePool::at_level(int level,
                                                          std::optional<std::uint64_t> run) const {
  std::vector<const CorrectionSample*> out;
  const auto it = samples_.find(level);
  if (it == samples_.end()) return out;
  for (const auto& [key, s] : it->second)
    if (!run || key.first == *run) out.push_back(&s);
  return out;
}

std::vector<int> SamplePool::levels() const {
  std::vector<int> out;
  for (const auto& [level, m] : samples_)
    if (!m.empty()) out.push_back(level);
  return out;
}

}  // namespace mlmcseis
