#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "sagda/date.hpp"
#include "sagda/error.hpp"
#include "sagda/table.hpp"

namespace sagda {

/// Client for the NASA POWER daily point API (T2M_MAX, T2M_MIN,
/// PRECTOTCORR). Fixture mode reads the same JSON response shape from local
/// files and is what every test runs against; live mode talks HTTPS with a
/// bounded retry and caches responses on disk keyed by (lat, lon, range).
class power_client {
public:
    struct config {
        enum class mode { fixture, live };
        mode source = mode::fixture;
        std::filesystem::path fixture_dir;          // fixture mode
        std::filesystem::path cache_dir = "cache/power";  // live mode
        std::string host = "https://power.larc.nasa.gov";
        int max_attempts = 3;
        int backoff_initial_ms = 500;  // doubles per retry
    };

    explicit power_client(config cfg) : cfg_(std::move(cfg)) {}

    /// Network requests actually issued (cache hits do not count).
    int requests_made() const { return requests_; }

    table fetch_daily(double lat, double lon, const date& start, const date& end) {
        if (lat < -90.0 || lat > 90.0) fail(errc::invalid_coords, "latitude outside [-90, 90]");
        if (lon < -180.0 || lon > 180.0)
            fail(errc::invalid_coords, "longitude outside [-180, 180]");
        if (end < start) fail(errc::invalid_coords, "start date after end date");

        const std::string key = cache_key(lat, lon, start, end);
        if (cfg_.source == config::mode::fixture) {
            const auto path = cfg_.fixture_dir / key;
            return parse_response(load_json(path), start, end);
        }

        const auto cached = cfg_.cache_dir / key;
        if (std::filesystem::exists(cached))
            return parse_response(load_json(cached), start, end);

        const nlohmann::json body = request(lat, lon, start, end);
        std::filesystem::create_directories(cfg_.cache_dir);
        const auto tmp = cached.string() + ".tmp";
        {
            std::ofstream os(tmp, std::ios::binary);
            os << body.dump();
        }
        std::filesystem::rename(tmp, cached);
        return parse_response(body, start, end);
    }

    static std::string cache_key(double lat, double lon, const date& start, const date& end) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.4f_%.4f_%s_%s.json", lat, lon,
                      compact(start).c_str(), compact(end).c_str());
        return buf;
    }

private:
    static std::string compact(const date& d) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d%02d%02d", d.year, d.month, d.day);
        return buf;
    }

    static nlohmann::json load_json(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(errc::io_failure, "cannot open '" + path.string() + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            fail(errc::api_schema_change, path.string() + ": " + e.what());
        }
        return j;
    }

    nlohmann::json request(double lat, double lon, const date& start, const date& end) {
        char path[256];
        std::snprintf(path, sizeof(path),
                      "/api/temporal/daily/point?parameters=T2M_MAX,T2M_MIN,PRECTOTCORR"
                      "&community=AG&latitude=%.4f&longitude=%.4f&start=%s&end=%s&format=JSON",
                      lat, lon, compact(start).c_str(), compact(end).c_str());

        std::string last_error = "no attempt made";
        int backoff = cfg_.backoff_initial_ms;
        for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
            ++requests_;
            httplib::Client cli(cfg_.host);
            cli.set_connection_timeout(10);
            cli.set_read_timeout(30);
            auto res = cli.Get(path);
            if (!res) {
                last_error = "transport error " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "HTTP status " + std::to_string(res->status);
                continue;
            }
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                last_error = e.what();
                continue;
            }
        }
        fail(errc::network_failure,
             "POWER request failed after " + std::to_string(cfg_.max_attempts) +
                 " attempts: " + last_error);
    }

    /// POWER response shape: properties.parameter.<NAME> maps "YYYYMMDD" to a
    /// value. tmin/tmax reorder on ingest; precipitation floors at 0, which
    /// also neutralizes the API's -999 fill value.
    static table parse_response(const nlohmann::json& j, const date& start, const date& end) {
        const nlohmann::json* params = nullptr;
        try {
            params = &j.at("properties").at("parameter");
        } catch (const nlohmann::json::exception&) {
            fail(errc::api_schema_change, "response lacks properties.parameter");
        }
        for (const char* name : {"T2M_MAX", "T2M_MIN", "PRECTOTCORR"})
            if (!params->contains(name))
                fail(errc::api_schema_change, std::string("response lacks ") + name);

        const auto& t_max = (*params)["T2M_MAX"];
        const auto& t_min = (*params)["T2M_MIN"];
        const auto& prec = (*params)["PRECTOTCORR"];

        std::vector<date> days;
        std::vector<double> lo, hi, rain;
        for (date d = start; !(end < d); d = add_days(d, 1)) {
            const std::string key = compact(d);
            if (!t_max.contains(key) || !t_min.contains(key) || !prec.contains(key))
                fail(errc::api_schema_change, "response missing day " + key);
            double a = t_min[key].get<double>();
            double b = t_max[key].get<double>();
            if (a > b) std::swap(a, b);
            days.push_back(d);
            lo.push_back(a);
            hi.push_back(b);
            rain.push_back(std::max(0.0, prec[key].get<double>()));
        }
        table t;
        t.add_column(date_column("date", std::move(days)));
        t.add_column(float_column("tmin", std::move(lo), "degC"));
        t.add_column(float_column("tmax", std::move(hi), "degC"));
        t.add_column(float_column("rain_mm", std::move(rain), "mm"));
        return t;
    }

    config cfg_;
    int requests_ = 0;
};

}  // namespace sagda
