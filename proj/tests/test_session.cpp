#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "comfort/session.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace comfort;
using namespace comfort::session;

namespace {

struct ManualClock {
  std::shared_ptr<std::atomic<std::int64_t>> now = std::make_shared<std::atomic<std::int64_t>>(1'000'000);
  Clock fn() const {
    return [n = now] { return n->load(); };
  }
};

StoreOptions options(const ManualClock& c) {
  StoreOptions o;
  o.clock = c.fn();
  return o;
}

template <class Fn>
Errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::Io;
}

ComfortRecord sample(std::int64_t ts) {
  ComfortRecord r;
  r.timestamp = ts;
  r.ambient_temp_arduino = 22.0;
  return r;
}

void feed(SessionStore& store, const std::string& id, const oracle::RawStreams& raw) {
  for (const auto& s : raw.samples) store.ingest_sample(id, s);
  for (const auto& [ts, l] : raw.labels) store.submit_label(id, ts, l);
  for (const auto& [ts, e] : raw.emotions) store.submit_emotion(id, ts, e);
}

}  // namespace

TEST(Session, CreateValidatesDemographics) {
  ManualClock clock;
  SessionStore store(options(clock));
  const auto id = store.create_session(Demographics{}, Scenario::Indoor);
  EXPECT_EQ(store.snapshot(id).status, Status::Open);
  EXPECT_EQ(store.snapshot(id).created_at, 1'000'000);
  Demographics bad;
  bad.gender = "X";
  EXPECT_EQ(code_of([&] { store.create_session(bad, Scenario::Indoor); }), Errc::InvalidDemographics);
  bad = {};
  bad.age = -1;
  EXPECT_EQ(code_of([&] { store.create_session(bad, Scenario::Indoor); }), Errc::InvalidDemographics);
  EXPECT_EQ(store.ids().size(), 1u);
  EXPECT_EQ(code_of([&] { store.snapshot("S999999"); }), Errc::UnknownSession);
}

TEST(Session, SampleTimestampsMayRepeatButNotGoBack) {
  SessionStore store;
  const auto id = store.create_session(Demographics{}, Scenario::Indoor);
  store.ingest_sample(id, sample(100));
  EXPECT_NO_THROW(store.ingest_sample(id, sample(100)));
  EXPECT_EQ(code_of([&] { store.ingest_sample(id, sample(90)); }), Errc::NonMonotonicTimestamp);
  auto bad = sample(200);
  bad.humidity = 120;
  EXPECT_EQ(code_of([&] { store.ingest_sample(id, bad); }), Errc::OutOfBoundsValue);
  EXPECT_EQ(store.snapshot(id).samples.size(), 2u);
}

TEST(Session, ClosedSessionRejectsWrites) {
  SessionStore store;
  const auto id = store.create_session(Demographics{}, Scenario::Indoor);
  store.close(id);
  EXPECT_EQ(code_of([&] { store.ingest_sample(id, sample(1)); }), Errc::SessionClosed);
  EXPECT_EQ(code_of([&] { store.submit_label(id, 1, 0); }), Errc::SessionClosed);
  EXPECT_EQ(code_of([&] { store.submit_emotion(id, 1, "Neutral"); }), Errc::SessionClosed);
  EXPECT_EQ(code_of([&] { store.next_prompt(id); }), Errc::SessionClosed);
  EXPECT_EQ(code_of([&] { store.close(id); }), Errc::SessionClosed);
}

TEST(Session, PromptSchedule) {
  ManualClock clock;
  SessionStore store(options(clock));
  const auto id = store.create_session(Demographics{}, Scenario::Indoor);
  const std::int64_t t0 = 1'000'000;
  auto p = store.next_prompt(id, t0 + 25'000);
  EXPECT_EQ(p.due_at, t0 + 40'000);
  EXPECT_EQ(p.index, 2u);
  EXPECT_EQ(store.next_prompt(id, t0).due_at, t0 + 20'000);
  EXPECT_EQ(store.next_prompt(id, t0 + 20'000).due_at, t0 + 20'000);
  EXPECT_EQ(store.next_prompt(id, t0 + 20'001).due_at, t0 + 40'000);
  clock.now->store(t0 + 25'000);
  EXPECT_EQ(store.next_prompt(id).due_at, t0 + 40'000);
  // One hour holds 180 prompts; every fifth asks for an emotion.
  std::size_t prompts = 0, emotion = 0;
  for (std::int64_t now = t0; now < t0 + 3'600'000;) {
    p = store.next_prompt(id, now);
    if (p.due_at > t0 + 3'600'000) break;
    ++prompts;
    emotion += p.kind == PromptKind::EmotionReport;
    EXPECT_EQ(p.kind == PromptKind::EmotionReport, p.index % 5 == 0);
    now = p.due_at + 1;
  }
  EXPECT_EQ(prompts, 180u);
  EXPECT_EQ(emotion, 36u);
  EXPECT_EQ(prompt_after(t0, 20'000, t0 + 100'000).kind, PromptKind::EmotionReport);
}

TEST(Session, LabelAndEmotionValidation) {
  SessionStore store;
  const auto id = store.create_session(Demographics{}, Scenario::Indoor);
  EXPECT_EQ(code_of([&] { store.submit_label(id, 1, 4); }), Errc::InvalidLabel);
  EXPECT_EQ(code_of([&] { store.submit_label(id, 1, -4); }), Errc::InvalidLabel);
  EXPECT_NO_THROW(store.submit_label(id, 1, -3));
  EXPECT_NO_THROW(store.submit_emotion(id, 1, "Contempt"));
  EXPECT_EQ(code_of([&] { store.submit_emotion(id, 1, "Bored"); }), Errc::UnknownCategory);
}

TEST(Session, ExportRules) {
  SessionStore store;
  const auto id = store.create_session(Demographics{}, Scenario::Indoor);
  store.ingest_sample(id, sample(100));
  EXPECT_EQ(code_of([&] { store.export_session(id); }), Errc::SessionOpen);
  store.close(id);
  EXPECT_EQ(code_of([&] { store.export_session(id); }), Errc::NoLabels);

  const auto id2 = store.create_session(Demographics{}, Scenario::Vehicle);
  for (std::int64_t ts : {100, 200, 300, 400}) store.ingest_sample(id2, sample(ts));
  store.submit_label(id2, 250, 2);
  store.submit_emotion(id2, 300, "Happiness");
  store.close(id2);
  const auto rs = store.export_session(id2);
  ASSERT_EQ(rs.records.size(), 4u);
  EXPECT_EQ(rs.scenario, Scenario::Vehicle);
  for (const auto& r : rs.records) EXPECT_EQ(r.label->value(), 2);
  EXPECT_EQ(rs.records[1].label_source, LabelSource::UserRated);
  EXPECT_EQ(rs.records[0].label_source, LabelSource::Extrapolated);
  EXPECT_EQ(rs.records[1].emotion_self, "Neutral");
  EXPECT_EQ(rs.records[2].emotion_self, "Happiness");
  EXPECT_EQ(store.export_csv(id2), store.export_csv(id2));
}

TEST(Session, ExportMatchesOracle) {
  Rng rng(2718);
  for (int trial = 0; trial < 200; ++trial) {
    SessionStore store;
    const auto raw = fixture::random_streams(rng, static_cast<std::size_t>(fixture::integer(rng, 1, 40)));
    const auto scenario = trial % 2 ? Scenario::Vehicle : Scenario::Indoor;
    const auto id = store.create_session(raw.demographics, scenario);
    feed(store, id, raw);
    store.close(id);
    ASSERT_EQ(store.export_csv(id), to_csv_string(oracle::export_oracle(id, scenario, raw))) << "trial " << trial;
  }
}

TEST(Session, JournalReplay) {
  fixture::TempDir dir("journal");
  Rng rng(5);
  const auto raw = fixture::random_streams(rng, 30);
  std::string closed_id, open_id, csv;
  {
    StoreOptions o;
    o.data_dir = dir.path;
    SessionStore store(o);
    closed_id = store.create_session(raw.demographics, Scenario::Indoor);
    feed(store, closed_id, raw);
    store.close(closed_id);
    csv = store.export_csv(closed_id);
    open_id = store.create_session(Demographics{}, Scenario::Indoor);
    store.ingest_sample(open_id, sample(5));
  }
  StoreOptions o;
  o.data_dir = dir.path;
  SessionStore reopened(o);
  EXPECT_EQ(reopened.ids().size(), 2u);
  EXPECT_EQ(reopened.export_csv(closed_id), csv);
  EXPECT_EQ(reopened.snapshot(open_id).status, Status::Open);
  EXPECT_EQ(reopened.snapshot(open_id).samples.size(), 1u);
  const auto fresh = reopened.create_session(Demographics{}, Scenario::Indoor);
  EXPECT_NE(fresh, closed_id);
  EXPECT_NE(fresh, open_id);
}

TEST(Session, ConcurrentWritersAcrossSessions) {
  SessionStore store;
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(store.create_session(Demographics{}, Scenario::Indoor));
  std::vector<std::thread> threads;
  for (const auto& id : ids)
    threads.emplace_back([&store, id] {
      for (std::int64_t ts = 0; ts < 500; ++ts) {
        store.ingest_sample(id, sample(ts));
        if (ts % 20 == 0) store.submit_label(id, ts, static_cast<int>(ts / 20 % 7) - 3);
      }
    });
  for (auto& t : threads) t.join();
  for (const auto& id : ids) {
    EXPECT_EQ(store.snapshot(id).samples.size(), 500u);
    EXPECT_EQ(store.snapshot(id).labels.size(), 25u);
  }
}
