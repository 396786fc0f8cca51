#include <gtest/gtest.h>

#include "cafm/broker_text.hpp"
#include "support/broker_checks.hpp"

using namespace cafm;
using namespace cafm::broker;

TEST(BrokerText, EncodeDecode) {
  for (const std::string s : {"", "plain", "a b", "50%", "x|y=z,w", "tab\tnew\nline", "->"}) {
    EXPECT_EQ(decode_value(encode_value(s)), s);
    EXPECT_EQ(encode_value(s).find_first_of(" |=,\n\t"), std::string::npos);
  }
  EXPECT_THROW(decode_value("%4"), Error);
  EXPECT_THROW(decode_value("%zz"), Error);
}

TEST(BrokerText, ParsesScriptLine) {
  auto m = parse_message("GetContextAwareService alice id=r1 req:MachineSeize=Small ctx.where=Europe pref:Theme=Dark qoc.precision=0.5");
  EXPECT_EQ(m.sender, "alice");
  auto& p = std::get<GetContextAwareService>(m.payload);
  EXPECT_EQ(p.request_id, "r1");
  EXPECT_EQ(p.requirements, (std::vector<RequirementTriple>{{"MachineSeize", "Small"}}));
  EXPECT_EQ(p.context.who, "alice");
  EXPECT_EQ(p.context.where, "Europe");
  EXPECT_EQ(p.qoc.precision, Rational(1, 2));
}

TEST(BrokerText, RejectsMalformed) {
  for (const char* bad : {"", "GetContextAwareService", "Bogus alice", "FindServiceContext alice colour=red",
                          "FindServiceContext alice novalue", "ErrorReply broker error=not-a-category",
                          "GetContextAwareService a threshold=lots", "NotifyQoCChange a obs:G=E qoc.precision=2"}) {
    EXPECT_THROW(parse_message(bad), Error) << bad;
  }
}

TEST(BrokerText, EveryTracedMessageRoundTrips) {
  support::Rng rng(4);
  for (int run = 0; run < 10; ++run) {
    const auto script = support::random_script(rng, 40);
    const auto session = run_session(support::case_study_state(), script);
    for (const auto& step : session.trace) {
      for (const auto* m : [&] {
             std::vector<const Message*> all{&step.input};
             for (const auto& o : step.outputs) all.push_back(&o);
             return all;
           }()) {
        const std::string line = format_message(*m);
        const Message back = parse_message(line);
        EXPECT_EQ(format_message(back), line);
        if (!std::holds_alternative<GetContextAwareService>(m->payload)) EXPECT_TRUE(back == *m) << line;
      }
    }
  }
}

TEST(BrokerText, TraceLineShape) {
  TraceStep step{{"alice", "", FindServiceContext{"S"}},
                 {{kBrokerId, "alice", ErrorReply{"", Errc::unknown_id, "unknown service 'S'"}}},
                 3};
  EXPECT_EQ(format_trace_step(step),
            "@3 FindServiceContext alice service=S => ErrorReply broker to=alice error=unknown-id "
            "detail=unknown%20service%20'S'");
}
