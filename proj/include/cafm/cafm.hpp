#ifndef CAFM_CAFM_HPP
#define CAFM_CAFM_HPP

#include "cafm/analysis.hpp"
#include "cafm/broker.hpp"
#include "cafm/broker_text.hpp"
#include "cafm/context.hpp"
#include "cafm/cscafm.hpp"
#include "cafm/error.hpp"
#include "cafm/feature_model.hpp"
#include "cafm/fm_xml.hpp"
#include "cafm/preprocessor.hpp"
#include "cafm/rational.hpp"
#include "cafm/text_formats.hpp"

#endif  // CAFM_CAFM_HPP
