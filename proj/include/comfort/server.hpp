#pragma once

// HTTP/JSON front end of the session store.
//
//   POST /sessions                  {"demographics": {...}, "scenario": "Indoor"}
//   POST /sessions/{id}/samples     one sample object or an array of them
//   POST /sessions/{id}/labels      {"timestamp": ms, "label": -3..3}
//   POST /sessions/{id}/emotions    {"timestamp": ms, "emotion": "Neutral"}
//   GET  /sessions/{id}/prompt      optional ?now=ms
//   POST /sessions/{id}/close
//   GET  /sessions/{id}/export      text/csv
//
// Errors answer {"error": <code name>, "message": ...}.

#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "comfort/error.hpp"
#include "comfort/session.hpp"

namespace comfort::session {

inline int http_status(Errc code) {
  switch (code) {
    case Errc::UnknownSession: return 404;
    case Errc::SessionClosed:
    case Errc::SessionOpen:
    case Errc::NoLabels:
    case Errc::NonMonotonicTimestamp: return 409;
    case Errc::InvalidDemographics:
    case Errc::InvalidLabel:
    case Errc::OutOfBoundsValue:
    case Errc::UnknownCategory: return 422;
    case Errc::Io: return 500;
    default: return 400;
  }
}

namespace server_detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

inline json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedRow, std::string("request body is not valid JSON: ") + e.what());
  }
}

/// Runs a handler and maps failures to JSON error responses.
template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, http_status(e.code()), errc_name(e.code()), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "Internal", e.what());
  }
}

}  // namespace server_detail

/// Registers the session routes on `srv`. The store must outlive it.
inline void install_routes(httplib::Server& srv, SessionStore& store) {
  using namespace server_detail;
  static const std::string id_pattern = R"(/sessions/([A-Za-z0-9_-]+))";

  srv.Post("/sessions", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      detail::reject_unknown(body, {"demographics", "scenario"}, Errc::InvalidDemographics);
      if (!body.contains("demographics")) throw Error(Errc::InvalidDemographics, "missing field 'demographics'");
      const auto d = demographics_from_json(body.at("demographics"));
      const auto scenario = scenario_from_string(body.value("scenario", std::string("Indoor")));
      const auto id = store.create_session(d, scenario);
      const auto s = store.snapshot(id);
      send_json(res, 201, {{"id", id}, {"status", to_string(s.status)}, {"created_at", s.created_at}});
    });
  });

  srv.Post(id_pattern + "/samples", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto id = req.matches[1].str();
      const auto body = parse_body(req);
      std::size_t accepted = 0;
      if (body.is_array()) {
        for (const auto& item : body) {
          store.ingest_sample(id, sample_from_json(item));
          ++accepted;
        }
      } else {
        store.ingest_sample(id, sample_from_json(body));
        accepted = 1;
      }
      send_json(res, 200, {{"accepted", accepted}});
    });
  });

  srv.Post(id_pattern + "/labels", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      detail::reject_unknown(body, {"timestamp", "label"}, Errc::MalformedRow);
      store.submit_label(req.matches[1].str(), detail::required<std::int64_t>(body, "timestamp", Errc::MalformedRow),
                         detail::required<int>(body, "label", Errc::InvalidLabel));
      send_json(res, 200, {{"accepted", 1}});
    });
  });

  srv.Post(id_pattern + "/emotions", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      detail::reject_unknown(body, {"timestamp", "emotion"}, Errc::MalformedRow);
      store.submit_emotion(req.matches[1].str(), detail::required<std::int64_t>(body, "timestamp", Errc::MalformedRow),
                           detail::required<std::string>(body, "emotion", Errc::UnknownCategory));
      send_json(res, 200, {{"accepted", 1}});
    });
  });

  srv.Get(id_pattern + "/prompt", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<std::int64_t> now;
      if (req.has_param("now")) {
        try {
          now = std::stoll(req.get_param_value("now"));
        } catch (const std::exception&) {
          throw Error(Errc::MalformedRow, "query parameter 'now' is not an integer");
        }
      }
      const auto p = store.next_prompt(req.matches[1].str(), now);
      send_json(res, 200, {{"due_at", p.due_at}, {"index", p.index}, {"kind", to_string(p.kind)}});
    });
  });

  srv.Post(id_pattern + "/close", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto id = req.matches[1].str();
      store.close(id);
      send_json(res, 200, {{"id", id}, {"status", "Closed"}});
    });
  });

  srv.Get(id_pattern + "/export", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      res.status = 200;
      res.set_content(store.export_csv(req.matches[1].str()), "text/csv");
    });
  });
}

}  // namespace comfort::session
