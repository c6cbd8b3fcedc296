#include "prevent/deployment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "prevent/errors.hpp"

namespace prevent::deployment {

namespace fs = std::filesystem;

void save(const std::string& dir, orchestration::PartySet& parties,
          const subscriber::SubscriberRegistry& registry,
          const Manifest& manifest) {
  fs::create_directories(dir);

  nlohmann::json j;
  j["servers"] = manifest.servers;
  j["seed"] = manifest.seed;
  j["stay_radius_cm"] = manifest.stay_radius_cm;
  j["retention_days"] = manifest.retention_days;
  j["last_day"] = manifest.last_day;
  j["params"] = {{"distance_cm", manifest.params.infectious_distance_cm},
                 {"tau_s", manifest.params.infectious_window_s},
                 {"incubation_days", manifest.params.incubation_days},
                 {"symmetric_window", manifest.params.symmetric_window},
                 {"window_from_contact", manifest.params.window_from_contact}};
  std::ofstream manifest_out(fs::path(dir) / "manifest.json");
  if (!manifest_out) throw InvalidInput("cannot write manifest: " + dir);
  manifest_out << j.dump(2) << '\n';

  parties.grid().store((fs::path(dir) / "grid.cfg").string());

  std::ofstream registry_out(fs::path(dir) / "registry.csv");
  if (!registry_out) throw InvalidInput("cannot write registry: " + dir);
  registry.export_csv(registry_out);

  for (std::uint32_t i = 0; i < parties.server_count(); ++i) {
    std::ofstream out(fs::path(dir) / ("server_" + std::to_string(i) + ".bin"),
                      std::ios::binary);
    if (!out) throw InvalidInput("cannot write server snapshot: " + dir);
    parties.server(i).snapshot_to(out);
  }
}

Loaded load(const std::string& dir) {
  Loaded loaded;

  std::ifstream manifest_in(fs::path(dir) / "manifest.json");
  if (!manifest_in) throw InvalidInput("cannot open manifest in: " + dir);
  std::stringstream buffer;
  buffer << manifest_in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(buffer.str(), nullptr, false);
  if (j.is_discarded()) throw InvalidInput("malformed manifest JSON");
  try {
    loaded.manifest.servers = j.at("servers").get<std::uint32_t>();
    loaded.manifest.seed = j.at("seed").get<std::uint64_t>();
    loaded.manifest.stay_radius_cm = j.at("stay_radius_cm").get<std::uint32_t>();
    loaded.manifest.retention_days = j.at("retention_days").get<std::uint32_t>();
    loaded.manifest.last_day = j.at("last_day").get<std::int32_t>();
    const auto& params = j.at("params");
    loaded.manifest.params.infectious_distance_cm =
        params.at("distance_cm").get<std::int64_t>();
    loaded.manifest.params.infectious_window_s =
        params.at("tau_s").get<std::uint32_t>();
    loaded.manifest.params.incubation_days =
        params.at("incubation_days").get<std::uint32_t>();
    loaded.manifest.params.symmetric_window =
        params.value("symmetric_window", true);
    loaded.manifest.params.window_from_contact =
        params.value("window_from_contact", false);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("manifest misses a field: ") + e.what());
  }

  grid::GridConfig grid =
      grid::GridConfig::load((fs::path(dir) / "grid.cfg").string());

  std::vector<server::TracingServer> servers;
  servers.reserve(loaded.manifest.servers);
  for (std::uint32_t i = 0; i < loaded.manifest.servers; ++i) {
    std::ifstream in(fs::path(dir) / ("server_" + std::to_string(i) + ".bin"),
                     std::ios::binary);
    if (!in) throw InvalidInput("missing server snapshot in: " + dir);
    servers.push_back(server::TracingServer::restore_from(in));
    if (servers.back().party() != i) {
      throw ProtocolError("server snapshot has the wrong party id");
    }
  }
  if (!servers.empty()) {
    const std::uint64_t digest = servers[0].shape_digest();
    for (const server::TracingServer& srv : servers) {
      if (srv.shape_digest() != digest) {
        throw ProtocolError("restored servers lost shape congruence");
      }
    }
  }

  loaded.parties = std::make_unique<orchestration::PartySet>(
      std::move(servers), std::move(grid), loaded.manifest.seed);

  loaded.authority = std::make_unique<subscriber::TokenAuthority>();
  std::ifstream registry_in(fs::path(dir) / "registry.csv");
  if (!registry_in) throw InvalidInput("missing registry in: " + dir);
  loaded.registry = std::make_unique<subscriber::SubscriberRegistry>(
      subscriber::SubscriberRegistry::import_csv(
          registry_in, loaded.authority.get(),
          mpc::SeededRng(loaded.manifest.seed).fork(0x5b5cUL)));
  return loaded;
}

}  // namespace prevent::deployment
