#include "run_state.hpp"

#include <fstream>

#include "config.hpp"
#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void write_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  util::write_file(tmp, contents);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace '" + path.string() + "': " + ec.message());
}

ResumableRun::ResumableRun(fs::path dir, std::string digest, std::vector<OutputSpec> outputs, bool fresh)
    : dir_(std::move(dir)), digest_(std::move(digest)), outputs_(std::move(outputs)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());

  const fs::path manifest = dir_ / kManifestName;
  if (!fresh && fs::exists(manifest)) {
    const json m = read_json_file(manifest);
    if (m.value("digest", std::string()) != digest_) {
      throw ConfigError("'" + dir_.string() +
                        "' holds a run with a different configuration; use a new output directory or --fresh");
    }
    completed_ = m.at("completed").get<long long>();
    state_ = m.value("state", json::object());
    for (const auto& spec : outputs_) {
      const auto want = m.at("offsets").at(spec.name).get<std::uintmax_t>();
      const fs::path p = dir_ / spec.name;
      if (!fs::exists(p) || fs::file_size(p) < want) {
        throw IoError("run directory '" + dir_.string() + "' is missing data in " + spec.name);
      }
      fs::resize_file(p, want);
      offsets_[spec.name] = want;
    }
    resumed_ = true;
    return;
  }

  for (const auto& spec : outputs_) {
    const std::string head = spec.header.empty() ? std::string() : spec.header + "\n";
    util::write_file(dir_ / spec.name, head);
    offsets_[spec.name] = head.size();
  }
  write_manifest();
}

void ResumableRun::append(const std::string& name, std::string_view text) {
  if (!offsets_.contains(name)) throw IoError("unknown run output '" + name + "'");
  pending_[name] += text;
}

void ResumableRun::commit(long long completed, json state) {
  for (auto& [name, text] : pending_) {
    if (text.empty()) continue;
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::app);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("cannot append to '" + p.string() + "'");
    offsets_[name] += text.size();
    text.clear();
  }
  completed_ = completed;
  state_ = std::move(state);
  write_manifest();
}

void ResumableRun::write_manifest() const {
  json offsets = json::object();
  for (const auto& [name, n] : offsets_) offsets[name] = n;
  const json m = {{"digest", digest_}, {"completed", completed_}, {"offsets", offsets}, {"state", state_}};
  write_atomic(dir_ / kManifestName, m.dump(2) + "\n");
}

}  // namespace etho::cli
