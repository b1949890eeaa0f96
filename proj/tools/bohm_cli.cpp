// Command-line front end: `bohm run --config cfg.json [--key value ...]`.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bohm/config.hpp"
#include "bohm/errors.hpp"
#include "bohm/run.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

json parse_value(const std::string& key, const std::string& text) {
    if (key == "model" || key == "method" || key == "out" || key == "analysis") return text;
    if (key == "r1" || key == "r2") {
        json arr = json::array();
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) {
            try {
                arr.push_back(std::stod(part));
            } catch (const std::exception&) {
                throw bohm::ConfigError(key, "must be three comma-separated numbers");
            }
        }
        return arr;
    }
    try {
        auto v = json::parse(text);
        if (v.is_number() || v.is_boolean() || v.is_array()) return v;
    } catch (const json::parse_error&) {
    }
    return text;
}

void apply_overrides(json& doc, const std::vector<std::string>& extras) {
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& tok = extras[i];
        if (tok.rfind("--", 0) != 0) throw bohm::ConfigError(tok, "expected --key value");
        std::string key = tok.substr(2);
        std::string value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= extras.size()) throw bohm::ConfigError(key, "missing value");
            value = extras[++i];
        }
        doc[key] = parse_value(key, value);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bohmian trajectories of entangled two-particle states"};
    app.require_subcommand(1);
    auto* run_cmd = app.add_subcommand("run", "run the selected analyses and write reports");
    std::string config_path;
    run_cmd->add_option("--config", config_path, "JSON config file (flat schema)");
    run_cmd->allow_extras();

    CLI11_PARSE(app, argc, argv);

    try {
        json doc = json::object();
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw bohm::ConfigError("config", "cannot read " + config_path);
            std::stringstream buf;
            buf << is.rdbuf();
            try {
                doc = json::parse(buf.str());
            } catch (const json::parse_error& e) {
                throw bohm::ConfigError("config", std::string("invalid JSON: ") + e.what());
            }
        }
        apply_overrides(doc, run_cmd->remaining());
        const auto cfg = bohm::config::from_json(doc);
        const auto result = bohm::run::run(cfg);
        for (const auto& c : result.claims) {
            std::cout << bohm::run::to_string(c.status) << "  " << c.claim_id << "  " << c.value.dump() << '\n';
        }
        std::cout << "outputs written to " << cfg.out_dir << '\n';
        return result.exit_code;
    } catch (const bohm::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
