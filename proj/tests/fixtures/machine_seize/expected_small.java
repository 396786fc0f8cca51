public class MachineSeize {
    IMachineSeize returnValue = null ;

    if(Price.isCalled())
    {

        try{
            //Small Machine feature
            returnValue=MachineSmall.getPrice();
            //Big Machine feature
            returnValue.adapte();
        }
        catch(SecurityMechanismException e){
            e.printStackTrace();}
    }
}
}
