public class GeoLocator {
    String unit() {
        //#if Europe
        return "Euro/hour";
        //#else
        return "Dollar/hour";
        //#endif
    }
}
