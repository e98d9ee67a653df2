#include <chrono>
#include <ctime>
#include <fstream>

#include "geese/errors.hpp"
#include "geese/interface.hpp"

namespace geese::iface {

using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename F>
void for_each_record(const std::filesystem::path& file, F&& f) {
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) continue;  // torn final line after a crash
    if (!f(rec)) return;
  }
}

}  // namespace

RunLog::RunLog(std::filesystem::path dir) : file_(dir / "runs.ndjson") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create state dir " + dir.string() + ": " + ec.message());
  std::ofstream probe(file_, std::ios::app);
  if (!probe) throw Error("state dir " + dir.string() + " is not writable");
  for_each_record(file_, [&](const json& rec) {
    last_id_ = std::max(last_id_, rec.value("run_id", std::int64_t{0}));
    return true;
  });
}

std::int64_t RunLog::append(const std::string& kind, const json& inputs, const json& result) {
  std::lock_guard lock(mu_);
  const std::int64_t id = last_id_ + 1;
  json rec = {{"run_id", id},
              {"timestamp", utc_now()},
              {"kind", kind},
              {"input_digest", input_digest(inputs)},
              {"inputs", inputs},
              {"result", result},
              {"toolkit_version", kToolkitVersion}};
  std::ofstream out(file_, std::ios::app);
  out << rec.dump() << '\n';
  out.flush();
  if (!out) throw Error("failed to append run record to " + file_.string());
  last_id_ = id;
  return id;
}

std::optional<json> RunLog::get(std::int64_t run_id) const {
  std::lock_guard lock(mu_);
  std::optional<json> found;
  for_each_record(file_, [&](const json& rec) {
    if (rec.value("run_id", std::int64_t{0}) != run_id) return true;
    found = rec;
    return false;
  });
  return found;
}

json RunLog::list() const {
  std::lock_guard lock(mu_);
  json out = json::array();
  for_each_record(file_, [&](const json& rec) {
    out.push_back({{"run_id", rec.value("run_id", std::int64_t{0})},
                   {"timestamp", rec.value("timestamp", "")},
                   {"kind", rec.value("kind", "")},
                   {"input_digest", rec.value("input_digest", "")}});
    return true;
  });
  return out;
}

}  // namespace geese::iface
